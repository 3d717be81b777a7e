#include "vortex/loss.hpp"

#include <cmath>
#include <numeric>

#include "vortex/error.hpp"
#include "vortex/parallel.hpp"

namespace vortex {

double supervised_loss(const ComplexTensor& pred, const ComplexTensor& target) {
  VORTEX_REQUIRE(same_shape(pred, target), "supervised_loss: shape mismatch");
  VORTEX_REQUIRE(!pred.empty(), "supervised_loss: empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

ComplexTensor supervised_loss_grad(const ComplexTensor& pred, const ComplexTensor& target) {
  VORTEX_REQUIRE(same_shape(pred, target), "supervised_loss: shape mismatch");
  ComplexTensor g(pred.shape());
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const cdouble d = pred[i] - target[i];
    const double m = std::abs(d);
    g[i] = m > 0.0 ? d * (inv_n / m) : cdouble{0.0, 0.0};
  }
  return g;
}

namespace {

// mean |a - b| over real entries, with d/da written into grad_a (and
// -grad_a is d/db).
double feature_l1(const FeatureMap& a, const FeatureMap& b, FeatureMap* grad_a, double scale) {
  VORTEX_REQUIRE(a.size() == b.size(), "latent consistency: tap shape mismatch");
  double acc = 0.0;
  const double inv_n = 1.0 / static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += std::abs(d);
    if (grad_a) grad_a->data[i] += d > 0.0 ? scale * inv_n : (d < 0.0 ? -scale * inv_n : 0.0);
  }
  return acc * inv_n;
}

}  // namespace

ConsistencyResult consistency_loss(const Reconstructor& f, const ModelParameters& params,
                                   const KSpaceTensor& y_u, const ForwardOperator& op,
                                   const AugmentPlan& g, const ConsistencyConfig& cfg,
                                   double weight, std::span<double> grad) {
  const bool latent = cfg.mode == ConsistencyMode::kLatent;
  VORTEX_REQUIRE(!latent || !cfg.latent_levels.empty(),
                 "consistency_loss: latent mode needs at least one tap level");
  VORTEX_REQUIRE(!(latent && g.has_equivariant()),
                 "consistency_loss: equivariant transforms are not defined on latent tensors");
  VORTEX_REQUIRE(grad.empty() || grad.size() == f.parameter_count(),
                 "consistency_loss: gradient buffer size mismatch");
  ConsistencyResult result;
  if (g.empty()) {
    if (latent)
      for (int level : cfg.latent_levels) result.per_tap[level] = 0.0;
    return result;
  }

  const AugmentOutput augmented = apply_plan(g, AugmentInput{y_u, op, false, std::nullopt});
  const ComplexTensor clean_in = zero_filled_recon(op, y_u);
  const ComplexTensor aug_in = zero_filled_recon(augmented.op, augmented.kspace);

  const bool want_grad = !grad.empty() && weight != 0.0;
  ForwardTrace clean_trace, aug_trace;
  const ComplexTensor clean_out = f.forward(params, clean_in, &clean_trace);
  const ComplexTensor aug_out = f.forward(params, aug_in, &aug_trace);

  if (!latent) {
    if (g.has_equivariant()) {
      const ResamplingPlan plan = equivariant_image_plan(g, op.height(), op.width());
      const ComplexTensor moved = plan.apply(clean_out);
      result.loss = supervised_loss(moved, aug_out);
      if (want_grad) {
        const ComplexTensor d_moved = supervised_loss_grad(moved, aug_out);
        f.backward(params, clean_trace, weight * plan.apply_adjoint(d_moved), nullptr, grad);
        f.backward(params, aug_trace, -weight * d_moved, nullptr, grad);
      }
    } else {
      result.loss = supervised_loss(clean_out, aug_out);
      if (want_grad) {
        const ComplexTensor d = supervised_loss_grad(clean_out, aug_out);
        f.backward(params, clean_trace, weight * d, nullptr, grad);
        f.backward(params, aug_trace, -weight * d, nullptr, grad);
      }
    }
    return result;
  }

  // Latent: average l1 over each level's tensors, then over levels.
  const double levels = static_cast<double>(cfg.latent_levels.size());
  TapTensors clean_grads, aug_grads;
  const ComplexTensor zero_out = ComplexTensor::image(clean_out.dim(0), clean_out.dim(1));
  double total = 0.0;
  for (int level : cfg.latent_levels) {
    auto ca = clean_trace.taps.find(level);
    auto cb = aug_trace.taps.find(level);
    VORTEX_REQUIRE(ca != clean_trace.taps.end() && cb != aug_trace.taps.end(),
                   "consistency_loss: model does not expose tap level " + std::to_string(level));
    const auto& ta = ca->second;
    const auto& tb = cb->second;
    const double per_tensor = 1.0 / static_cast<double>(ta.size());
    double tap_loss = 0.0;
    std::vector<FeatureMap> ga, gb;
    for (std::size_t k = 0; k < ta.size(); ++k) {
      FeatureMap grad_a(ta[k].channels, ta[k].height, ta[k].width);
      const double scale = weight * per_tensor / levels;
      tap_loss += per_tensor * feature_l1(ta[k], tb[k], want_grad ? &grad_a : nullptr, scale);
      if (want_grad) {
        FeatureMap grad_b = grad_a;
        for (double& v : grad_b.data) v = -v;
        ga.push_back(std::move(grad_a));
        gb.push_back(std::move(grad_b));
      }
    }
    result.per_tap[level] = tap_loss;
    total += tap_loss;
    if (want_grad) {
      clean_grads[level] = std::move(ga);
      aug_grads[level] = std::move(gb);
    }
  }
  result.loss = total / levels;
  if (want_grad) {
    f.backward(params, clean_trace, zero_out, &clean_grads, grad);
    f.backward(params, aug_trace, zero_out, &aug_grads, grad);
  }
  return result;
}

void LossConfig::validate() const {
  VORTEX_REQUIRE(lambda >= 0.0 && std::isfinite(lambda), "loss: lambda must be nonnegative");
  VORTEX_REQUIRE(consistency.mode != ConsistencyMode::kLatent ||
                     !consistency.latent_levels.empty(),
                 "loss: latent mode needs at least one tap level");
}

LossBreakdown total_loss(const Reconstructor& f, const ModelParameters& params,
                         const Batch& batch, const LossConfig& cfg, std::span<double> grad,
                         int workers) {
  cfg.validate();
  const bool want_grad = !grad.empty();
  VORTEX_REQUIRE(!want_grad || grad.size() == f.parameter_count(),
                 "total_loss: gradient buffer size mismatch");
  const std::size_t ns = batch.supervised.size();
  const std::size_t nu = batch.unsupervised.size();
  const std::size_t items = ns + nu;
  const std::size_t p = f.parameter_count();

  std::vector<double> values(items, 0.0);
  std::vector<std::map<int, double>> taps(nu);
  std::vector<std::vector<double>> grads(want_grad ? items : 0);

  parallel_for(items, workers, [&](std::size_t i) {
    std::span<double> g;
    if (want_grad) {
      grads[i].assign(p, 0.0);
      g = grads[i];
    }
    if (i < ns) {
      const SupervisedItem& item = batch.supervised[i];
      ForwardTrace trace;
      const ComplexTensor out = f.forward(params, item.input, want_grad ? &trace : nullptr);
      values[i] = supervised_loss(out, item.target);
      if (want_grad) {
        const double w = 1.0 / static_cast<double>(ns);
        f.backward(params, trace, w * supervised_loss_grad(out, item.target), nullptr, g);
      }
    } else {
      const UnsupervisedItem& item = batch.unsupervised[i - ns];
      const double w = cfg.lambda / static_cast<double>(nu);
      const bool grad_here = want_grad && cfg.lambda != 0.0;
      ConsistencyResult r = consistency_loss(f, params, item.kspace, item.op, item.plan,
                                             cfg.consistency, grad_here ? w : 0.0,
                                             grad_here ? g : std::span<double>{});
      values[i] = r.loss;
      taps[i - ns] = std::move(r.per_tap);
    }
  });

  LossBreakdown out;
  for (std::size_t i = 0; i < ns; ++i) out.supervised += values[i];
  if (ns > 0) out.supervised /= static_cast<double>(ns);
  for (std::size_t i = ns; i < items; ++i) out.consistency += values[i];
  if (nu > 0) out.consistency /= static_cast<double>(nu);
  for (const auto& m : taps)
    for (const auto& [level, v] : m) out.per_tap[level] += v / static_cast<double>(nu);
  out.total = out.supervised + cfg.lambda * out.consistency;

  if (want_grad)
    for (std::size_t i = 0; i < items; ++i)
      for (std::size_t k = 0; k < p; ++k) grad[k] += grads[i][k];
  return out;
}

}  // namespace vortex
