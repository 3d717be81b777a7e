#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vortex/augment.hpp"
#include "vortex/dataset.hpp"
#include "vortex/loss.hpp"
#include "vortex/model.hpp"
#include "vortex/optim.hpp"

namespace vortex {

// kSupervised: l1 on supervised slices only.
// kAugment: supervised l1 where each supervised example is augmented with
//   probability p(t) (MRAugment-style baseline).
// kVortex: supervised l1 plus lambda * consistency on unsupervised slices.
enum class TrainMode { kSupervised, kAugment, kVortex };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::kSupervised;
  std::size_t epochs = 50;
  std::size_t batch_size = 8;  // split 1:1 between supervised and unsupervised
  std::uint64_t seed = 0;
  AdamConfig adam;
  LossConfig loss;
  // Augment mode: supervised augmentations. Vortex mode: consistency
  // augmentations. Ignored in supervised mode.
  std::vector<TransformSpec> transforms;
  // Augment mode probability p(t) = p_max * beta_exp(t) with this schedule's
  // M and gamma; a kNone schedule keeps p at p_max.
  double aug_p_max = 0.2;
  CurriculumSchedule aug_schedule;
  ImageTransformRanges ranges;
  ModelConfig model;
  int workers = 1;
  void validate() const;
};

struct TrainData {
  std::vector<ScanRecord> supervised;
  std::vector<ScanRecord> unsupervised;
  std::vector<ScanRecord> validation;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;     // averaged over the epoch's steps
  double val_cpsnr = 0.0;
  double val_ssim = 0.0;
  std::map<std::string, double> sigma_high;   // per transform kind
  std::map<std::string, double> probability;  // per transform kind
  bool best = false;
  std::string to_json() const;
};

struct TrainResult {
  ModelParameters final_params;
  ModelParameters best_params;
  std::size_t best_epoch = 0;
  double best_val_cpsnr = 0.0;
  std::size_t steps_per_epoch = 0;
  std::vector<EpochLog> log;
};

struct TrainOptions {
  // Run directory; empty keeps everything in memory. When set, the run
  // writes metrics.jsonl, checkpoints/epoch_NNNN.ckpt, best.ckpt, last.ckpt
  // and a resume state, and resumes from that state if present.
  std::filesystem::path dir;
  // Stop after this many completed epochs (simulated interruption).
  std::optional<std::size_t> stop_after;
  // Tag of the resolved configuration; a resume with a different tag fails.
  std::uint64_t config_tag = 0;
};

// ceil(max(n_sup, n_unsup) / (batch / 2)) with n counted in slices.
std::size_t steps_per_epoch(std::size_t supervised_slices, std::size_t unsupervised_slices,
                            std::size_t batch_size);

// Example order for one side of the balanced sampler: concatenated keyed
// permutations of [0, n) truncated to `count` entries.
std::vector<std::size_t> sampler_order(std::uint64_t seed, std::uint64_t side,
                                       std::size_t epoch, std::size_t n, std::size_t count);

// Mean cPSNR and SSIM over validation scans (clean undersampled input).
std::pair<double, double> validate_model(const Reconstructor& f, const ModelParameters& params,
                                         const std::vector<ScanRecord>& scans, int workers);

TrainResult train(const TrainConfig& cfg, const TrainData& data, const TrainOptions& options = {});

}  // namespace vortex
