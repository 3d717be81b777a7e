#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vortex/model.hpp"

namespace vortex {

struct GradientCheckOptions {
  std::size_t samples = 50;
  double step = 1e-5;
  double tolerance = 1e-3;
  std::uint64_t seed = 1;
  // Parameters whose central difference changes with the step size are
  // straddling a kink of the leaky rectifier or the l1 loss; they are
  // redrawn, at most this many times in total.
  std::size_t max_resamples = 200;
};

struct GradientCheckEntry {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool passed = false;
};

struct GradientCheckReport {
  std::vector<GradientCheckEntry> entries;
  std::size_t resampled = 0;
  double max_rel_error = 0.0;
  bool passed = false;

  std::vector<GradientCheckEntry> failures() const;
};

using ScalarLoss = std::function<double(const ModelParameters&)>;
using LossGradient = std::function<std::vector<double>(const ModelParameters&)>;

// Compares the analytic gradient against central differences on randomly
// chosen parameters: |analytic - numeric| / max(1e-6, |analytic|, |numeric|)
// must stay below the tolerance.
GradientCheckReport gradient_check(const ModelParameters& at, const ScalarLoss& loss,
                                   const LossGradient& gradient,
                                   const GradientCheckOptions& options);

enum class CheckedLoss {
  kZero,
  kSupervisedL1,
  kInvariantConsistency,
  kEquivariantConsistency,
  kLatentConsistency,
  kTotal,
};

std::string_view to_string(CheckedLoss loss);

// Self-contained check on a synthetic 8x8 problem (2 coils) for the given
// model configuration and loss. Requires at most 10^4 parameters.
GradientCheckReport gradient_check(const ModelConfig& config, CheckedLoss loss,
                                   const GradientCheckOptions& options = {});

}  // namespace vortex
