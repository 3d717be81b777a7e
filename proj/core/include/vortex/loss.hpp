#pragma once

#include <map>
#include <span>
#include <vector>

#include "vortex/augment.hpp"
#include "vortex/forward.hpp"
#include "vortex/model.hpp"

namespace vortex {

// Mean over pixels of the complex modulus |pred - target|.
double supervised_loss(const ComplexTensor& pred, const ComplexTensor& target);
// d/dpred of supervised_loss (zero where pred == target).
ComplexTensor supervised_loss_grad(const ComplexTensor& pred, const ComplexTensor& target);

enum class ConsistencyMode { kPixel, kLatent };

struct ConsistencyConfig {
  ConsistencyMode mode = ConsistencyMode::kPixel;
  std::vector<int> latent_levels;  // required non-empty in latent mode
};

struct ConsistencyResult {
  double loss = 0.0;
  // Latent mode: l1 per tap level. `loss` is their mean, so lambda * loss
  // weights each tap by lambda / |taps|.
  std::map<int, double> per_tap;
};

// Consistency between the reconstruction of y_u and of its augmentation g:
//   invariant g:    || f(y) - f(g(y)) ||_1
//   equivariant g:  || g(f(y)) - f(g(y)) ||_1
// When `grad` is non-empty, weight * dL/dtheta is accumulated into it through
// both branches.
ConsistencyResult consistency_loss(const Reconstructor& f, const ModelParameters& params,
                                   const KSpaceTensor& y_u, const ForwardOperator& op,
                                   const AugmentPlan& g, const ConsistencyConfig& cfg,
                                   double weight = 0.0, std::span<double> grad = {});

struct SupervisedItem {
  ComplexTensor input;   // zero-filled reconstruction fed to the model
  ComplexTensor target;  // ground truth image
};

struct UnsupervisedItem {
  KSpaceTensor kspace;  // undersampled
  ForwardOperator op;
  AugmentPlan plan;
};

struct Batch {
  std::vector<SupervisedItem> supervised;
  std::vector<UnsupervisedItem> unsupervised;
};

struct LossConfig {
  double lambda = 0.1;
  ConsistencyConfig consistency;

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double supervised = 0.0;
  double consistency = 0.0;
  std::map<int, double> per_tap;
};

// supervised mean-l1 over supervised items + lambda * mean consistency over
// unsupervised items. Gradients (if `grad` is non-empty) are accumulated in
// item order so the result does not depend on the worker count.
LossBreakdown total_loss(const Reconstructor& f, const ModelParameters& params,
                         const Batch& batch, const LossConfig& cfg, std::span<double> grad = {},
                         int workers = 1);

}  // namespace vortex
