#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vortex/model.hpp"

namespace vortex {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  static AdamState zeros(std::size_t n) { return {std::vector<double>(n), std::vector<double>(n), 0}; }
};

// One bias-corrected Adam update with decoupled weight decay
// (theta <- theta - lr * wd * theta, then the Adam step). Throws
// NonFiniteError naming the first offending gradient entry.
void adam_step(ModelParameters& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace vortex
