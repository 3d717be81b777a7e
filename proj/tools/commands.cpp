#include "commands.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "vortex/augment.hpp"
#include "vortex/config.hpp"
#include "vortex/dataset.hpp"
#include "vortex/error.hpp"
#include "vortex/evaluate.hpp"
#include "vortex/image_io.hpp"
#include "vortex/metrics.hpp"
#include "vortex/parallel.hpp"
#include "vortex/train.hpp"
#include "vortex/version.hpp"

namespace vortex::cli {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

ExperimentConfig load(const CommonOptions& o, bool out_is_data_dir = false) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.out) (out_is_data_dir ? cfg.data_dir : cfg.output_dir) = *o.out;
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  cfg.validate();
  return cfg;
}

int workers_for(const ExperimentConfig& cfg) {
  const int cap = default_workers();
  return cfg.train.workers > 0 ? std::min(cfg.train.workers, cap) : cap;
}

Dataset open_dataset(const ExperimentConfig& cfg) {
  if (!fs::exists(cfg.data_dir / "manifest.json"))
    throw IoError("no dataset at '" + cfg.data_dir.string() +
                  "'. Run `vortex generate-data --config <same config>` first.");
  Dataset d = read_dataset(cfg.data_dir);
  const Geometry expected = cfg.data.padded();
  if (!(d.manifest().geometry == expected))
    throw InvalidArgument("dataset at '" + cfg.data_dir.string() +
                          "' has a different geometry than the config; regenerate it");
  if (d.manifest().dataset_seed != cfg.data.seed)
    std::cerr << "warning: dataset was generated with seed " << d.manifest().dataset_seed
              << ", config seed is " << cfg.data.seed << "\n";
  return d;
}

std::string model_label(const ExperimentConfig& cfg) {
  std::string kinds;
  for (const auto& t : cfg.train.transforms) {
    if (!kinds.empty()) kinds += "+";
    kinds += std::string(to_string(t.kind));
  }
  switch (cfg.train.mode) {
    case TrainMode::kSupervised: return "Supervised";
    case TrainMode::kAugment: return "Aug(" + kinds + ")";
    case TrainMode::kVortex:
      return "VORTEX(" + kinds +
             (cfg.train.loss.consistency.mode == ConsistencyMode::kLatent ? ", latent" : "") + ")";
  }
  return "model";
}

void write_run_header(const ExperimentConfig& cfg, const fs::path& dir) {
  make_dir(dir);
  write_text(dir / "config.json", cfg.to_json());
  write_text(dir / "VERSION", std::string(version_string()) + "\n");
}

void emit_results(const EvaluationTable& table, const fs::path& dir) {
  for (const auto& row : table.rows)
    if (row.cpsnr_excluded > 0)
      std::cerr << "warning: " << row.perturbation << ": " << row.cpsnr_excluded
                << " scan(s) with infinite cPSNR left out of the mean\n";
  write_text(dir / "results.json", tables_to_json({table}));
  const std::string text = format_table({table});
  write_text(dir / "results.txt", text);
  std::cout << text;
}

double json_number(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>() == "-inf" ? -kCpsnrInfinite : kCpsnrInfinite;
  return j.get<double>();
}

std::vector<EvaluationTable> read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::vector<EvaluationTable> out;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& t : j) {
      EvaluationTable table;
      table.model = t.at("model").get<std::string>();
      for (const auto& r : t.at("rows")) {
        MetricsRecord rec;
        rec.perturbation = r.at("perturbation").get<std::string>();
        for (const auto& s : r.at("per_scan"))
          rec.per_scan.push_back({s.at("scan_id").get<std::uint64_t>(),
                                  json_number(s.at("cpsnr_db")), s.at("ssim").get<double>()});
        rec.aggregate();
        table.rows.push_back(std::move(rec));
      }
      out.push_back(std::move(table));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDataset("results '" + path.string() + "': " + e.what());
  }
  return out;
}

// "none", "noise:0.2", "motion:0.4", or an image transform name.
DrawnTransform parse_preview_spec(const std::string& spec, std::size_t h, std::size_t w,
                                  KeyedRng& rng) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  double level = 0.0;
  if (colon != std::string::npos) {
    try {
      level = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("preview spec '" + spec + "': bad level");
    }
  }
  DrawnTransform t;
  if (name == "none") {
    t.kind = TransformKind::kNoise;
    t.noise = {0.0, 0};
    return t;
  }
  t.kind = parse_transform_kind(name);
  if (t.kind == TransformKind::kNoise) {
    t.noise = {level, rng.next_u64()};
  } else if (t.kind == TransformKind::kMotion) {
    t.motion = draw_motion(level, rng);
  } else {
    t.image = draw_image_params(t.kind, h, w, ImageTransformRanges{}, rng);
  }
  return t;
}

}  // namespace

int generate_data(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o, /*out_is_data_dir=*/true);
  if (o.dry_run) {
    std::cout << cfg.to_json();
    return kOk;
  }
  const DatasetManifest m = build_dataset(cfg.data, cfg.data_dir, workers_for(cfg));
  std::cout << "wrote " << m.scans.size() << " scans to " << cfg.data_dir.string() << "\n";
  return kOk;
}

int train(const CommonOptions& o, std::optional<std::size_t> stop_after) {
  const ExperimentConfig cfg = load(o);
  if (o.dry_run) {
    std::cout << cfg.to_json();
    return kOk;
  }
  const Dataset dataset = open_dataset(cfg);
  TrainData data{dataset.load_role(ScanRole::kTrainSupervised),
                 dataset.load_role(ScanRole::kTrainUnsupervised),
                 dataset.load_role(ScanRole::kValidation)};
  write_run_header(cfg, cfg.output_dir);

  TrainConfig tc = cfg.train;
  tc.workers = workers_for(cfg);
  TrainOptions opts{cfg.output_dir, stop_after, cfg.tag()};
  const TrainResult result = train(tc, data, opts);
  if (!result.log.empty()) std::cout << "epoch " << result.log.back().epoch << " done\n";
  if (result.log.size() < tc.epochs) {
    std::cout << "stopped after " << result.log.size() << " of " << tc.epochs
              << " epochs; rerun the same command to resume\n";
    return kOk;
  }
  std::cout << "best epoch " << result.best_epoch << " (val cPSNR " << result.best_val_cpsnr
            << " dB)\n";
  const UNet net(tc.model);
  const auto table = evaluate_model(net, result.best_params, dataset.load_role(ScanRole::kTest),
                                    cfg.perturbations, tc.workers, model_label(cfg));
  emit_results(table, cfg.output_dir);
  return kOk;
}

int evaluate(const CommonOptions& o, std::optional<fs::path> checkpoint) {
  const ExperimentConfig cfg = load(o);
  fs::path ck_path = checkpoint.value_or(fs::path(cfg.eval_checkpoint));
  if (!checkpoint) {
    if (cfg.eval_checkpoint == "best") ck_path = cfg.output_dir / "best.ckpt";
    if (cfg.eval_checkpoint == "last") ck_path = cfg.output_dir / "last.ckpt";
  }
  if (o.dry_run) {
    std::cout << cfg.to_json();
    return kOk;
  }
  if (!fs::exists(ck_path))
    throw IoError("checkpoint '" + ck_path.string() + "' not found. Train first.");
  const Dataset dataset = open_dataset(cfg);
  const Checkpoint ck = load_checkpoint(ck_path);
  const auto table =
      evaluate_checkpoint(ck, cfg.train.model, dataset.load_role(ScanRole::kTest),
                          cfg.perturbations, workers_for(cfg), model_label(cfg));
  make_dir(cfg.output_dir);
  emit_results(table, cfg.output_dir);
  return kOk;
}

int augment_preview(const CommonOptions& o, std::uint64_t scan_id, const std::string& spec,
                    std::size_t slice) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  const fs::path dir = o.out.value_or(cfg.output_dir / "preview");
  const Dataset dataset = open_dataset(cfg);
  if (!dataset.contains(scan_id))
    throw InvalidArgument("unknown scan_id " + std::to_string(scan_id));
  const ScanRecord scan = dataset.load(scan_id);
  VORTEX_REQUIRE(slice < scan.slices(), "slice index out of range");
  const std::size_t h = scan.maps.height(), w = scan.maps.width();
  KeyedRng rng(cfg.seed, scan_id, slice);
  const DrawnTransform t = parse_preview_spec(spec, h, w, rng);
  if (o.dry_run) return kOk;

  const ForwardOperator op = scan.op();
  const KSpaceTensor y = apply_mask(scan.mask, scan.kspace[slice]);
  AugmentPlan plan;
  (t.family() == TransformFamily::kInvariant ? plan.invariant : plan.equivariant).push_back(t);
  const AugmentOutput aug = apply_plan(plan, {y, op, false, std::nullopt});
  const auto clean = magnitude(zero_filled_recon(op, y));
  const auto augmented = magnitude(zero_filled_recon(aug.op, aug.kspace));
  std::vector<double> diff(clean.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(augmented[i] - clean[i]);

  make_dir(dir);
  const double hi = percentile99(clean);
  const auto dump = [&](const std::string& name, const std::vector<double>& v, double top) {
    const GrayImage img = window_to_gray(v, h, w, top);
    write_pgm(dir / (name + ".pgm"), img);
    write_png(dir / (name + ".png"), img);
  };
  dump("clean", clean, hi);
  dump("augmented", augmented, hi);
  dump("difference", diff, percentile99(diff));
  std::cout << "wrote previews to " << dir.string() << "\n";
  return kOk;
}

int report(const std::vector<fs::path>& runs, std::optional<fs::path> out) {
  std::vector<EvaluationTable> tables;
  for (const auto& run : runs) {
    auto t = read_results(run / "results.json");
    tables.insert(tables.end(), t.begin(), t.end());
  }
  const std::string text = format_table(tables);
  std::cout << text;
  if (out) {
    make_dir(*out);
    write_text(*out / "report.json", tables_to_json(tables));
    write_text(*out / "report.txt", text);
  }
  return kOk;
}

}  // namespace vortex::cli
