#include "vortex/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vortex/augment.hpp"
#include "vortex/error.hpp"
#include "vortex/loss.hpp"
#include "vortex/phantom.hpp"
#include "vortex/rng.hpp"

namespace vortex {

std::vector<GradientCheckEntry> GradientCheckReport::failures() const {
  std::vector<GradientCheckEntry> out;
  for (const auto& e : entries)
    if (!e.passed) out.push_back(e);
  return out;
}

namespace {

double central_difference(const ScalarLoss& loss, ModelParameters& theta, std::size_t i,
                          double step) {
  const double saved = theta.values[i];
  theta.values[i] = saved + step;
  const double up = loss(theta);
  theta.values[i] = saved - step;
  const double down = loss(theta);
  theta.values[i] = saved;
  return (up - down) / (2.0 * step);
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

}  // namespace

GradientCheckReport gradient_check(const ModelParameters& at, const ScalarLoss& loss,
                                   const LossGradient& gradient,
                                   const GradientCheckOptions& options) {
  VORTEX_REQUIRE(options.step > 0.0 && options.tolerance > 0.0, "gradient_check: bad options");
  const std::size_t n = at.size();
  GradientCheckReport report;
  report.passed = true;
  if (n == 0) return report;
  const std::vector<double> analytic = gradient(at);
  VORTEX_REQUIRE(analytic.size() == n, "gradient_check: gradient size mismatch");

  ModelParameters theta = at;
  KeyedRng rng(hash64(options.seed, 0x67636b));
  std::set<std::size_t> tried;
  const std::size_t want = std::min(options.samples, n);
  while (report.entries.size() < want && tried.size() < n) {
    std::size_t i = rng.below(n);
    if (!tried.insert(i).second) continue;
    const double numeric = central_difference(loss, theta, i, options.step);
    // A kink inside [theta - h, theta + h] shows up as disagreement between
    // step sizes h and h/2.
    const double half = central_difference(loss, theta, i, options.step / 2.0);
    if (relative_error(numeric, half) > options.tolerance / 2.0 &&
        report.resampled < options.max_resamples) {
      ++report.resampled;
      continue;
    }
    GradientCheckEntry e{i, analytic[i], numeric, relative_error(analytic[i], numeric), false};
    e.passed = e.rel_error < options.tolerance;
    report.passed = report.passed && e.passed;
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.entries.push_back(e);
  }
  return report;
}

std::string_view to_string(CheckedLoss loss) {
  switch (loss) {
    case CheckedLoss::kZero: return "zero";
    case CheckedLoss::kSupervisedL1: return "supervised-l1";
    case CheckedLoss::kInvariantConsistency: return "invariant-consistency";
    case CheckedLoss::kEquivariantConsistency: return "equivariant-consistency";
    case CheckedLoss::kLatentConsistency: return "latent-consistency";
    case CheckedLoss::kTotal: return "total";
  }
  return "?";
}

namespace {

DrawnTransform motion_transform() {
  DrawnTransform t;
  t.kind = TransformKind::kMotion;
  t.motion = {0.3, 0.7, -0.4};
  return t;
}

DrawnTransform noise_transform() {
  DrawnTransform t;
  t.kind = TransformKind::kNoise;
  t.noise = {0.1, 17};
  return t;
}

DrawnTransform rotate_transform() {
  DrawnTransform t;
  t.kind = TransformKind::kRotate;
  t.image.kind = TransformKind::kRotate;
  t.image.angle_deg = 9.0;
  return t;
}

struct Problem {
  std::vector<ComplexTensor> images;
  ForwardOperator op;
};

Problem make_problem(std::uint64_t seed) {
  constexpr std::size_t kSize = 8, kCoils = 2;
  KeyedRng rng(hash64(seed, 0x70726f62));
  SensitivityMaps maps = synthesize_maps(kCoils, kSize, kSize, rng);
  UndersamplingMask mask = UndersamplingMask::full(kSize, kSize);
  for (std::size_t i = 0; i < kSize; ++i)
    for (std::size_t j = 0; j < kSize; ++j) {
      const bool center = i >= 3 && i <= 4 && j >= 3 && j <= 4;
      mask.bits[i * kSize + j] = center || rng.uniform() < 0.4;
    }
  mask.acceleration = static_cast<double>(kSize * kSize) / static_cast<double>(mask.count());
  Problem p{{}, ForwardOperator(maps, mask)};
  for (int k = 0; k < 2; ++k) {
    ComplexTensor x = ComplexTensor::image(kSize, kSize);
    for (auto& z : x.storage()) z = {rng.normal(), rng.normal()};
    p.images.push_back(std::move(x));
  }
  return p;
}

}  // namespace

GradientCheckReport gradient_check(const ModelConfig& config, CheckedLoss which,
                                   const GradientCheckOptions& options) {
  const UNet net(config);
  VORTEX_REQUIRE(net.parameter_count() <= 10000, "gradient_check: model too large");
  ModelParameters start = net.initialize(options.seed);
  // Nonzero biases so every bias path is exercised.
  KeyedRng prng(hash64(options.seed, 0x62696173));
  for (const ParamBlock& b : net.layout().blocks)
    for (std::size_t k = 0; k < b.out_channels; ++k)
      start.values[b.bias_offset + k] = prng.uniform(-0.1, 0.1);

  const Problem prob = make_problem(options.seed);

  Batch batch;
  LossConfig cfg;
  cfg.lambda = 1.0;
  auto unsup = [&](std::size_t k, AugmentPlan plan) {
    const KSpaceTensor y = forward_apply(prob.op, prob.images[k]);
    batch.unsupervised.push_back({y, prob.op, std::move(plan)});
  };
  auto sup = [&](std::size_t k) {
    const KSpaceTensor y = forward_apply(prob.op, prob.images[k]);
    batch.supervised.push_back({zero_filled_recon(prob.op, y), prob.images[k]});
  };

  switch (which) {
    case CheckedLoss::kZero:
      break;
    case CheckedLoss::kSupervisedL1:
      sup(0);
      sup(1);
      break;
    case CheckedLoss::kInvariantConsistency:
      unsup(0, {{}, {noise_transform(), motion_transform()}});
      break;
    case CheckedLoss::kEquivariantConsistency:
      unsup(0, {{rotate_transform()}, {}});
      break;
    case CheckedLoss::kLatentConsistency:
      cfg.consistency.mode = ConsistencyMode::kLatent;
      cfg.consistency.latent_levels = config.latent_taps;
      unsup(0, {{}, {motion_transform()}});
      break;
    case CheckedLoss::kTotal:
      cfg.lambda = 0.1;
      sup(0);
      unsup(1, {{}, {motion_transform()}});
      unsup(0, {{rotate_transform()}, {noise_transform()}});
      break;
  }

  const ScalarLoss loss = [&](const ModelParameters& p) {
    return total_loss(net, p, batch, cfg).total;
  };
  const LossGradient gradient = [&](const ModelParameters& p) {
    std::vector<double> g(p.size(), 0.0);
    total_loss(net, p, batch, cfg, g);
    return g;
  };
  return gradient_check(start, loss, gradient, options);
}

}  // namespace vortex
