#include "vortex/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "binary_io.hpp"
#include "vortex/error.hpp"
#include "vortex/metrics.hpp"
#include "vortex/parallel.hpp"

namespace vortex {
namespace {

constexpr std::uint64_t kSupSide = 0x73757076;    // "supv"
constexpr std::uint64_t kUnsupSide = 0x756e7375;  // "unsu"
constexpr std::string_view kStateMagic = "VTXS";
constexpr std::uint32_t kStateVersion = 1;

struct SliceRef {
  std::size_t scan = 0;
  std::size_t slice = 0;
};

std::vector<SliceRef> slice_refs(const std::vector<ScanRecord>& scans) {
  std::vector<SliceRef> out;
  for (std::size_t s = 0; s < scans.size(); ++s)
    for (std::size_t k = 0; k < scans[s].slices(); ++k) out.push_back({s, k});
  return out;
}

struct ResumeState {
  std::uint64_t config_tag = 0;
  std::size_t completed = 0;
  std::size_t best_epoch = 0;
  double best_cpsnr = 0.0;
  ModelParameters params;
  ModelParameters best_params;
  AdamState adam;
};

void put_f64s(detail::ByteWriter& w, const std::vector<double>& v) {
  for (double x : v) w.u64(std::bit_cast<std::uint64_t>(x));
}

std::vector<double> get_f64s(detail::ByteReader& r, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = std::bit_cast<double>(r.u64());
  return v;
}

void save_state(const std::filesystem::path& path, const ResumeState& s) {
  detail::ByteWriter w;
  w.raw(kStateMagic);
  w.u32(kStateVersion);
  w.u64(s.config_tag);
  w.u64(s.completed);
  w.u64(s.best_epoch);
  w.u64(std::bit_cast<std::uint64_t>(s.best_cpsnr));
  w.u64(s.params.size());
  put_f64s(w, s.params.values);
  put_f64s(w, s.best_params.values);
  put_f64s(w, s.adam.m);
  put_f64s(w, s.adam.v);
  w.u64(s.adam.step);
  detail::seal(w);
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  detail::write_file(tmp, w.bytes());
  std::filesystem::rename(tmp, path);
}

ResumeState load_state(const std::filesystem::path& path) {
  const std::string what = "resume state '" + path.string() + "'";
  const auto bytes = detail::read_file(path);
  detail::verify_seal(bytes, what);
  detail::ByteReader r(bytes.data(), bytes.size() - 4, what);
  if (r.str(4) != kStateMagic) throw CorruptDataset(what + ": bad magic");
  if (r.u32() != kStateVersion) throw CorruptDataset(what + ": unsupported version");
  ResumeState s;
  s.config_tag = r.u64();
  s.completed = r.u64();
  s.best_epoch = r.u64();
  s.best_cpsnr = std::bit_cast<double>(r.u64());
  const std::size_t n = r.u64();
  if (n * 32 > r.remaining()) throw CorruptDataset(what + ": truncated");
  s.params.values = get_f64s(r, n);
  s.best_params.values = get_f64s(r, n);
  s.adam.m = get_f64s(r, n);
  s.adam.v = get_f64s(r, n);
  s.adam.step = r.u64();
  return s;
}

nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nullptr;
}

std::string epoch_file(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04zu.ckpt", epoch);
  return buf;
}

// Keeps the first `keep` lines of the metrics log.
void truncate_log(const std::filesystem::path& path, std::size_t keep) {
  std::vector<std::string> lines;
  {
    std::ifstream in(path);
    std::string line;
    while (lines.size() < keep && std::getline(in, line)) lines.push_back(line);
  }
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  detail::write_text(path, text);
}

void append_line(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to '" + path.string() + "'");
  out << line << "\n";
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kSupervised: return "supervised";
    case TrainMode::kAugment: return "aug";
    case TrainMode::kVortex: return "vortex";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view name) {
  for (TrainMode m : {TrainMode::kSupervised, TrainMode::kAugment, TrainMode::kVortex})
    if (to_string(m) == name) return m;
  throw InvalidArgument("unknown training mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  VORTEX_REQUIRE(epochs >= 1, "train: epochs must be positive");
  VORTEX_REQUIRE(batch_size >= 2 && batch_size % 2 == 0,
                 "train: batch size must be a positive even number (1:1 split)");
  adam.validate();
  loss.validate();
  model.validate();
  VORTEX_REQUIRE(aug_p_max >= 0.0 && aug_p_max <= 1.0, "train: aug_p_max must be in [0, 1]");
  aug_schedule.validate();
  for (const auto& t : transforms) t.validate();
  if (mode == TrainMode::kVortex && loss.consistency.mode == ConsistencyMode::kLatent) {
    for (const auto& t : transforms)
      VORTEX_REQUIRE(t.family() == TransformFamily::kInvariant,
                     "train: latent consistency is only defined for invariant transforms");
    for (int level : loss.consistency.latent_levels)
      VORTEX_REQUIRE(std::find(model.latent_taps.begin(), model.latent_taps.end(), level) !=
                         model.latent_taps.end(),
                     "train: latent level " + std::to_string(level) + " is not a model tap");
  }
}

std::string EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  nlohmann::ordered_json l;
  l["total"] = loss.total;
  l["supervised"] = loss.supervised;
  l["consistency"] = loss.consistency;
  if (!loss.per_tap.empty()) {
    nlohmann::ordered_json taps;
    for (const auto& [level, v] : loss.per_tap) taps[std::to_string(level)] = v;
    l["per_tap"] = taps;
  }
  j["loss"] = l;
  j["val"] = {{"cpsnr", finite_or_null(val_cpsnr)}, {"ssim", finite_or_null(val_ssim)}};
  j["sigma_high"] = sigma_high;
  j["p"] = probability;
  j["best"] = best;
  return j.dump();
}

std::size_t steps_per_epoch(std::size_t supervised_slices, std::size_t unsupervised_slices,
                            std::size_t batch_size) {
  VORTEX_REQUIRE(batch_size >= 2, "steps_per_epoch: batch too small");
  const std::size_t per_side = batch_size / 2;
  const std::size_t n = std::max(supervised_slices, unsupervised_slices);
  return (n + per_side - 1) / per_side;
}

std::vector<std::size_t> sampler_order(std::uint64_t seed, std::uint64_t side, std::size_t epoch,
                                       std::size_t n, std::size_t count) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  out.reserve(count + n);
  for (std::uint64_t round = 0; out.size() < count; ++round) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    KeyedRng rng(hash64(seed, side, epoch, round));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    out.insert(out.end(), perm.begin(), perm.end());
  }
  out.resize(count);
  return out;
}

std::pair<double, double> validate_model(const Reconstructor& f, const ModelParameters& params,
                                         const std::vector<ScanRecord>& scans, int workers) {
  if (scans.empty()) return {std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> c(scans.size()), s(scans.size());
  parallel_for(scans.size(), workers, [&](std::size_t k) {
    const ScanRecord& scan = scans[k];
    const ForwardOperator op = scan.op();
    const std::size_t h = scan.maps.height(), w = scan.maps.width(), n = h * w;
    ComplexTensor pred({scan.slices(), h, w}), ref({scan.slices(), h, w});
    for (std::size_t i = 0; i < scan.slices(); ++i) {
      const ComplexTensor x =
          f.forward(params, zero_filled_recon(op, apply_mask(scan.mask, scan.kspace[i])), nullptr);
      std::copy(x.storage().begin(), x.storage().end(), pred.storage().begin() + i * n);
      std::copy(scan.images[i].storage().begin(), scan.images[i].storage().end(),
                ref.storage().begin() + i * n);
    }
    c[k] = cpsnr(pred, ref);
    s[k] = ssim(magnitude(pred), magnitude(ref), scan.slices(), h, w);
  });
  double mc = 0.0, ms = 0.0;
  for (std::size_t k = 0; k < scans.size(); ++k) {
    mc += c[k];
    ms += s[k];
  }
  return {mc / static_cast<double>(scans.size()), ms / static_cast<double>(scans.size())};
}

TrainResult train(const TrainConfig& cfg, const TrainData& data, const TrainOptions& options) {
  cfg.validate();
  VORTEX_REQUIRE(!data.supervised.empty(), "train: dataset has no supervised scans");
  for (const auto& s : data.supervised)
    VORTEX_REQUIRE(s.fully_sampled(), "train: supervised scans must be fully sampled");
  for (const auto& s : data.validation)
    VORTEX_REQUIRE(s.fully_sampled(), "train: validation scans must be fully sampled");

  const UNet net(cfg.model);
  const std::vector<SliceRef> sup = slice_refs(data.supervised);
  const std::vector<SliceRef> unsup = slice_refs(data.unsupervised);
  const std::size_t per_side = cfg.batch_size / 2;
  const std::size_t steps = steps_per_epoch(sup.size(), unsup.size(), cfg.batch_size);
  const bool use_unsup = cfg.mode == TrainMode::kVortex && !unsup.empty();

  std::vector<ForwardOperator> sup_ops, unsup_ops;
  for (const auto& s : data.supervised) sup_ops.push_back(s.op());
  for (const auto& s : data.unsupervised) unsup_ops.push_back(s.op());
  // Clean zero-filled inputs are reused every epoch.
  std::vector<ComplexTensor> sup_inputs(sup.size());
  parallel_for(sup.size(), cfg.workers, [&](std::size_t i) {
    const ScanRecord& scan = data.supervised[sup[i].scan];
    sup_inputs[i] = zero_filled_recon(sup_ops[sup[i].scan],
                                      apply_mask(scan.mask, scan.kspace[sup[i].slice]));
  });

  LossConfig loss_cfg = cfg.loss;
  if (cfg.mode != TrainMode::kVortex) loss_cfg.lambda = 0.0;

  ResumeState state;
  state.config_tag = options.config_tag;
  state.params = net.initialize(cfg.seed);
  state.best_params = state.params;
  state.adam = AdamState::zeros(net.parameter_count());
  state.best_cpsnr = -std::numeric_limits<double>::infinity();

  const bool on_disk = !options.dir.empty();
  const auto state_path = options.dir / "train_state.bin";
  const auto log_path = options.dir / "metrics.jsonl";
  TrainResult result;
  result.steps_per_epoch = steps;
  if (on_disk) {
    std::error_code ec;
    std::filesystem::create_directories(options.dir / "checkpoints", ec);
    if (ec) throw IoError("cannot create run directory '" + options.dir.string() + "'");
    if (std::filesystem::exists(state_path)) {
      ResumeState loaded = load_state(state_path);
      VORTEX_REQUIRE(loaded.config_tag == options.config_tag,
                     "train: run directory holds a run with a different configuration");
      VORTEX_REQUIRE(loaded.params.size() == net.parameter_count(),
                     "train: resume state does not match the model");
      state = std::move(loaded);
      truncate_log(log_path, state.completed);
      std::ifstream in(log_path);
      std::string line;
      while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EpochLog e;
        e.epoch = j.at("epoch").get<std::size_t>();
        e.loss.total = j.at("loss").at("total").get<double>();
        e.loss.supervised = j.at("loss").at("supervised").get<double>();
        e.loss.consistency = j.at("loss").at("consistency").get<double>();
        e.best = j.at("best").get<bool>();
        if (j.at("val").at("cpsnr").is_number()) e.val_cpsnr = j["val"]["cpsnr"].get<double>();
        if (j.at("val").at("ssim").is_number()) e.val_ssim = j["val"]["ssim"].get<double>();
        result.log.push_back(std::move(e));
      }
    } else {
      detail::write_text(log_path, "");
    }
  }

  auto checkpoint_of = [&](const ModelParameters& p, std::size_t epoch) {
    Checkpoint ck{cfg.model, net.layout(), p, {}};
    ck.metadata["epoch"] = std::to_string(epoch);
    ck.metadata["mode"] = std::string(to_string(cfg.mode));
    return ck;
  };

  for (std::size_t epoch = state.completed; epoch < cfg.epochs; ++epoch) {
    if (options.stop_after && epoch >= *options.stop_after) break;
    const double t = static_cast<double>(epoch);
    EpochLog log;
    log.epoch = epoch + 1;

    std::vector<TransformSpec> specs;
    for (const auto& spec : cfg.transforms) {
      TransformSpec s = spec.at_epoch(t);
      if (cfg.mode == TrainMode::kAugment)
        s.probability = cfg.aug_schedule.kind == CurriculumKind::kNone
                            ? cfg.aug_p_max
                            : schedule_probability(cfg.aug_p_max, t, cfg.aug_schedule);
      const std::string name(to_string(s.kind));
      log.sigma_high[name] = s.difficulty_hi;
      log.probability[name] = s.probability;
      specs.push_back(std::move(s));
    }

    const auto sup_order = sampler_order(cfg.seed, kSupSide, epoch, sup.size(), steps * per_side);
    const auto unsup_order =
        use_unsup ? sampler_order(cfg.seed, kUnsupSide, epoch, unsup.size(), steps * per_side)
                  : std::vector<std::size_t>{};

    LossBreakdown sum;
    for (std::size_t step = 0; step < steps; ++step) {
      Batch batch;
      batch.supervised.resize(per_side);
      std::vector<std::optional<UnsupervisedItem>> drawn(use_unsup ? per_side : 0);
      const std::size_t items = batch.supervised.size() + drawn.size();
      parallel_for(items, cfg.workers, [&](std::size_t k) {
        const std::size_t slot = step * per_side + (k % per_side);
        const std::uint64_t example_id = (k < per_side ? 0 : 1) + 2 * slot;
        if (k < per_side) {
          const SliceRef ref = sup[sup_order[slot]];
          const ScanRecord& scan = data.supervised[ref.scan];
          SupervisedItem& item = batch.supervised[k];
          item.target = scan.images[ref.slice];
          if (cfg.mode == TrainMode::kAugment && !specs.empty()) {
            KeyedRng rng = augmentation_rng(cfg.seed, epoch, example_id);
            AugmentPlan plan = draw_plan(specs, scan.maps.height(), scan.maps.width(),
                                         cfg.ranges, rng);
            if (!plan.empty()) {
              AugmentInput in{scan.kspace[ref.slice], sup_ops[ref.scan], true, item.target};
              AugmentOutput out = apply_plan(plan, in);
              item.input = zero_filled_recon(out.op, out.kspace);
              item.target = std::move(*out.target);
              return;
            }
          }
          item.input = sup_inputs[sup_order[slot]];
        } else {
          const SliceRef ref = unsup[unsup_order[slot]];
          const ScanRecord& scan = data.unsupervised[ref.scan];
          KeyedRng rng = augmentation_rng(cfg.seed, epoch, example_id);
          drawn[k - per_side] = UnsupervisedItem{
              scan.kspace[ref.slice], unsup_ops[ref.scan],
              draw_plan(specs, scan.maps.height(), scan.maps.width(), cfg.ranges, rng)};
        }
      });
      for (auto& d : drawn) batch.unsupervised.push_back(std::move(*d));

      std::vector<double> grad(net.parameter_count(), 0.0);
      const LossBreakdown b = total_loss(net, state.params, batch, loss_cfg, grad, cfg.workers);
      adam_step(state.params, grad, state.adam, cfg.adam);
      round_to_float32(state.params);
      sum.total += b.total;
      sum.supervised += b.supervised;
      sum.consistency += b.consistency;
      for (const auto& [level, v] : b.per_tap) sum.per_tap[level] += v;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    log.loss.total = sum.total * inv;
    log.loss.supervised = sum.supervised * inv;
    log.loss.consistency = sum.consistency * inv;
    for (const auto& [level, v] : sum.per_tap) log.loss.per_tap[level] = v * inv;

    std::tie(log.val_cpsnr, log.val_ssim) =
        validate_model(net, state.params, data.validation, cfg.workers);
    const bool better = data.validation.empty() || state.best_epoch == 0 ||
                        log.val_cpsnr > state.best_cpsnr;
    if (better) {
      state.best_epoch = epoch + 1;
      state.best_cpsnr = log.val_cpsnr;
      state.best_params = state.params;
      log.best = true;
    }
    state.completed = epoch + 1;

    if (on_disk) {
      const auto ck = checkpoint_of(state.params, epoch + 1);
      save_checkpoint(options.dir / "checkpoints" / epoch_file(epoch + 1), ck);
      save_checkpoint(options.dir / "last.ckpt", ck);
      if (better) save_checkpoint(options.dir / "best.ckpt", checkpoint_of(state.best_params, epoch + 1));
      append_line(log_path, log.to_json());
      save_state(state_path, state);
    }
    result.log.push_back(std::move(log));
  }

  result.final_params = state.params;
  result.best_params = state.best_params;
  result.best_epoch = state.best_epoch;
  result.best_val_cpsnr = state.best_cpsnr;
  return result;
}

}  // namespace vortex
