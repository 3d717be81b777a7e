#include "vortex/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "vortex/augment.hpp"
#include "vortex/error.hpp"
#include "vortex/metrics.hpp"
#include "vortex/parallel.hpp"

namespace vortex {

void PerturbationSpec::validate() const {
  VORTEX_REQUIRE(std::isfinite(level) && level >= 0.0, "perturbation: level must be >= 0");
  VORTEX_REQUIRE(kind != PerturbationKind::kNone || level == 0.0,
                 "perturbation: kind none requires level 0");
}

std::vector<PerturbationSpec> standard_perturbations(std::uint64_t seed) {
  return {{"None", PerturbationKind::kNone, 0.0, seed},
          {"LN", PerturbationKind::kNoise, 0.2, seed},
          {"HN", PerturbationKind::kNoise, 0.4, seed},
          {"LM", PerturbationKind::kMotion, 0.2, seed},
          {"HM", PerturbationKind::kMotion, 0.4, seed}};
}

std::vector<KSpaceTensor> perturb_test_scan(const ScanRecord& scan, const PerturbationSpec& spec) {
  spec.validate();
  std::vector<KSpaceTensor> out;
  out.reserve(scan.slices());
  for (std::size_t s = 0; s < scan.slices(); ++s) {
    KSpaceTensor y = apply_mask(scan.mask, scan.kspace[s]);
    KeyedRng rng(spec.seed, scan.scan_id, s);
    switch (spec.kind) {
      case PerturbationKind::kNone: break;
      case PerturbationKind::kNoise: y = apply_noise(y, scan.mask, spec.level, rng); break;
      case PerturbationKind::kMotion: y = apply_motion(y, spec.level, rng); break;
    }
    out.push_back(std::move(y));
  }
  return out;
}

void MetricsRecord::aggregate() {
  cpsnr_excluded = 0;
  std::vector<double> c, s;
  for (const auto& m : per_scan) {
    if (std::isinf(m.cpsnr_db) && m.cpsnr_db > 0)
      ++cpsnr_excluded;
    else
      c.push_back(m.cpsnr_db);
    s.push_back(m.ssim);
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
  };
  stats(c, cpsnr_mean, cpsnr_std);
  if (c.empty() && !per_scan.empty()) cpsnr_mean = kCpsnrInfinite;
  stats(s, ssim_mean, ssim_std);
}

EvaluationTable evaluate_model(const Reconstructor& f, const ModelParameters& params,
                               const std::vector<ScanRecord>& test,
                               const std::vector<PerturbationSpec>& specs, int workers,
                               std::string model_name) {
  VORTEX_REQUIRE(!test.empty(), "evaluate: empty test set");
  VORTEX_REQUIRE(params.size() == f.parameter_count(), "evaluate: parameter count mismatch");
  for (const auto& scan : test)
    VORTEX_REQUIRE(scan.fully_sampled(), "evaluate: test scans need ground truth");
  EvaluationTable table;
  table.model = std::move(model_name);
  for (const PerturbationSpec& spec : specs) {
    MetricsRecord rec;
    rec.perturbation = spec.name;
    rec.per_scan.resize(test.size());
    parallel_for(test.size(), workers, [&](std::size_t k) {
      const ScanRecord& scan = test[k];
      const auto ys = perturb_test_scan(scan, spec);
      const ForwardOperator op = scan.op();
      const std::size_t h = scan.maps.height(), w = scan.maps.width(), n = h * w;
      ComplexTensor pred({scan.slices(), h, w}), ref({scan.slices(), h, w});
      for (std::size_t s = 0; s < scan.slices(); ++s) {
        const ComplexTensor x = f.forward(params, zero_filled_recon(op, ys[s]), nullptr);
        std::copy(x.storage().begin(), x.storage().end(), pred.storage().begin() + s * n);
        const auto& gt = scan.images[s].storage();
        std::copy(gt.begin(), gt.end(), ref.storage().begin() + s * n);
      }
      const auto mp = magnitude(pred), mr = magnitude(ref);
      rec.per_scan[k] = {scan.scan_id, cpsnr(pred, ref), ssim(mp, mr, scan.slices(), h, w)};
    });
    rec.aggregate();
    table.rows.push_back(std::move(rec));
  }
  return table;
}

EvaluationTable evaluate_checkpoint(const Checkpoint& checkpoint, const ModelConfig& expected,
                                    const std::vector<ScanRecord>& test,
                                    const std::vector<PerturbationSpec>& specs, int workers,
                                    std::string model_name) {
  VORTEX_REQUIRE(checkpoint.config == expected,
                 "evaluate: checkpoint model config does not match the experiment config");
  const UNet net(expected);
  VORTEX_REQUIRE(checkpoint.layout == net.layout(),
                 "evaluate: checkpoint parameter layout does not match the model");
  return evaluate_model(net, checkpoint.params, test, specs, workers, std::move(model_name));
}

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string cell(double mean, double sd, int precision) {
  char buf[64];
  if (std::isinf(mean))
    std::snprintf(buf, sizeof buf, "inf");
  else
    std::snprintf(buf, sizeof buf, "%.*f+-%.*f", precision, mean, precision, sd);
  return buf;
}

}  // namespace

std::string tables_to_json(const std::vector<EvaluationTable>& tables) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& t : tables) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
      nlohmann::ordered_json scans = nlohmann::ordered_json::array();
      for (const auto& m : r.per_scan)
        scans.push_back({{"scan_id", m.scan_id}, {"cpsnr_db", number(m.cpsnr_db)}, {"ssim", m.ssim}});
      rows.push_back({{"perturbation", r.perturbation},
                      {"ssim_mean", r.ssim_mean},
                      {"ssim_std", r.ssim_std},
                      {"cpsnr_mean", number(r.cpsnr_mean)},
                      {"cpsnr_std", r.cpsnr_std},
                      {"cpsnr_excluded", r.cpsnr_excluded},
                      {"per_scan", scans}});
    }
    out.push_back({{"model", t.model}, {"rows", rows}});
  }
  return out.dump(2) + "\n";
}

std::string format_table(const std::vector<EvaluationTable>& tables) {
  if (tables.empty()) return "";
  std::size_t name_w = 5;
  for (const auto& t : tables) name_w = std::max(name_w, t.model.size());
  const auto& cols = tables.front().rows;
  constexpr int kCol = 28;
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_w), "Model");
  os << buf;
  for (const auto& c : cols) {
    std::snprintf(buf, sizeof buf, " | %-*s", kCol, c.perturbation.c_str());
    os << buf;
  }
  os << "\n";
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_w), "");
  os << buf;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::snprintf(buf, sizeof buf, " | %-13s %-14s", "SSIM", "cPSNR (dB)");
    os << buf;
  }
  os << "\n";
  for (const auto& t : tables) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_w), t.model.c_str());
    os << buf;
    for (const auto& r : t.rows) {
      std::snprintf(buf, sizeof buf, " | %-13s %-14s", cell(r.ssim_mean, r.ssim_std, 4).c_str(),
                    cell(r.cpsnr_mean, r.cpsnr_std, 2).c_str());
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace vortex
