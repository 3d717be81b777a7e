#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vortex/dataset.hpp"
#include "vortex/model.hpp"

namespace vortex {

enum class PerturbationKind { kNone, kNoise, kMotion };

// Test-time corruption: noise level sigma or motion level alpha.
struct PerturbationSpec {
  std::string name;
  PerturbationKind kind = PerturbationKind::kNone;
  double level = 0.0;
  std::uint64_t seed = 0;
  void validate() const;
};

// None, LN (sigma 0.2), HN (sigma 0.4), LM (alpha 0.2), HM (alpha 0.4).
std::vector<PerturbationSpec> standard_perturbations(std::uint64_t seed);

// Undersampled k-space of every slice of the scan with the perturbation
// applied. Draws are keyed by (spec.seed, scan_id, slice), so repeated calls
// are bit-identical.
std::vector<KSpaceTensor> perturb_test_scan(const ScanRecord& scan, const PerturbationSpec& spec);

struct ScanMetrics {
  std::uint64_t scan_id = 0;
  double cpsnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricsRecord {
  std::string perturbation;
  std::vector<ScanMetrics> per_scan;
  double cpsnr_mean = 0.0;
  double cpsnr_std = 0.0;
  double ssim_mean = 0.0;
  double ssim_std = 0.0;
  // Scans with an infinite cPSNR, left out of the cPSNR aggregate.
  std::size_t cpsnr_excluded = 0;
  // Recomputes the aggregates from per_scan (sample standard deviation).
  void aggregate();
};

struct EvaluationTable {
  std::string model;
  std::vector<MetricsRecord> rows;  // one per perturbation, in spec order
};

// Reconstructs every test slice from perturbed undersampled k-space, stacks
// each scan's slices, and scores cPSNR on the complex stack and SSIM on the
// magnitude stack. Scans are evaluated in parallel and merged in scan order.
EvaluationTable evaluate_model(const Reconstructor& f, const ModelParameters& params,
                               const std::vector<ScanRecord>& test,
                               const std::vector<PerturbationSpec>& specs, int workers = 1,
                               std::string model_name = "model");

// Loads the checkpoint and checks it against the expected model config.
EvaluationTable evaluate_checkpoint(const Checkpoint& checkpoint, const ModelConfig& expected,
                                    const std::vector<ScanRecord>& test,
                                    const std::vector<PerturbationSpec>& specs, int workers = 1,
                                    std::string model_name = "model");

std::string tables_to_json(const std::vector<EvaluationTable>& tables);
// Models as rows, perturbations as column groups (SSIM, cPSNR).
std::string format_table(const std::vector<EvaluationTable>& tables);

}  // namespace vortex
