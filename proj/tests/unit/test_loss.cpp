#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vortex/error.hpp"
#include "vortex/loss.hpp"

using namespace vortex;

namespace {

struct Problem {
  ForwardOperator op;
  ComplexTensor x;
  KSpaceTensor y;
};

Problem problem(std::uint64_t seed) {
  ForwardOperator op(test::random_maps(2, 8, 8, seed), test::random_mask(8, 8, 0.4, seed));
  ComplexTensor x = test::random_tensor({8, 8}, seed + 1);
  KSpaceTensor y = forward_apply(op, x);
  return {std::move(op), std::move(x), std::move(y)};
}

AugmentPlan motion_plan(double alpha, double odd, double even) {
  AugmentPlan plan;
  DrawnTransform t;
  t.kind = TransformKind::kMotion;
  t.motion = {alpha, odd, even};
  plan.invariant.push_back(t);
  return plan;
}

AugmentPlan noise_plan(double sigma) {
  AugmentPlan plan;
  DrawnTransform t;
  t.kind = TransformKind::kNoise;
  t.noise = {sigma, 3};
  plan.invariant.push_back(t);
  return plan;
}

}  // namespace

TEST(SupervisedLoss, WorkedExamples) {
  const ComplexTensor t = test::random_tensor({4, 5}, 1);
  EXPECT_EQ(supervised_loss(t, t), 0.0);
  ComplexTensor shifted = t;
  for (std::size_t i = 0; i < t.size(); ++i) shifted[i] += cdouble(0.6, 0.8);
  EXPECT_NEAR(supervised_loss(shifted, t), 1.0, 1e-15);
  ComplexTensor one = t;
  one[7] += cdouble(3.0, -4.0);
  EXPECT_NEAR(supervised_loss(one, t), 5.0 / 20.0, 1e-15);
  const ComplexTensor g = supervised_loss_grad(one, t);
  EXPECT_NEAR(std::abs(g[7] - cdouble(3.0, -4.0) / (5.0 * 20.0)), 0.0, 1e-16);
  EXPECT_EQ(g[0], cdouble(0.0));
  EXPECT_THROW(supervised_loss(t, test::random_tensor({5, 4}, 1)), InvalidArgument);
}

TEST(Consistency, EmptyPlanIsZero) {
  const Problem pb = problem(1);
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  const ModelParameters p = net.initialize(1);
  EXPECT_EQ(consistency_loss(net, p, pb.y, pb.op, AugmentPlan{}, {}).loss, 0.0);
  EXPECT_EQ(consistency_loss(net, p, pb.y, pb.op, noise_plan(0.0), {}).loss, 0.0);
}

TEST(Consistency, IdentityModelWithMotionMatchesDirectComputation) {
  const Problem pb = problem(2);
  const IdentityReconstructor id;
  const AugmentPlan plan = motion_plan(0.4, 0.5, -0.3);
  const double direct =
      supervised_loss(zero_filled_recon(pb.op, pb.y),
                      zero_filled_recon(pb.op, apply_motion(pb.y, plan.invariant[0].motion)));
  EXPECT_GT(direct, 0.0);
  EXPECT_NEAR(consistency_loss(id, {}, pb.y, pb.op, plan, {}).loss, direct, 1e-15);
}

TEST(Consistency, IdentityModelWithGridFlipIsZero) {
  const Problem pb = problem(3);
  const IdentityReconstructor id;
  AugmentPlan plan;
  DrawnTransform t;
  t.kind = TransformKind::kFlipH;
  t.image.kind = TransformKind::kFlipH;
  plan.equivariant.push_back(t);
  EXPECT_LT(consistency_loss(id, {}, pb.y, pb.op, plan, {}).loss, 1e-14);
}

TEST(Consistency, LatentRejectsEquivariantPlans) {
  const Problem pb = problem(4);
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  AugmentPlan plan;
  DrawnTransform t;
  t.kind = TransformKind::kRotate;
  t.image.kind = TransformKind::kRotate;
  t.image.angle_deg = 5.0;
  plan.equivariant.push_back(t);
  ConsistencyConfig cfg{ConsistencyMode::kLatent, {1}};
  EXPECT_THROW(consistency_loss(net, net.initialize(1), pb.y, pb.op, plan, cfg), InvalidArgument);
}

TEST(Consistency, LatentReportsEveryTap) {
  const Problem pb = problem(5);
  const UNet net(ModelConfig{2, 2, {1, 2}, 0.01});
  ConsistencyConfig cfg{ConsistencyMode::kLatent, {1, 2}};
  const auto r = consistency_loss(net, net.initialize(1), pb.y, pb.op, motion_plan(0.5, 0.9, -0.9), cfg);
  ASSERT_EQ(r.per_tap.size(), 2u);
  EXPECT_GT(r.per_tap.at(1), 0.0);
  EXPECT_GT(r.per_tap.at(2), 0.0);
  EXPECT_NEAR(r.loss, 0.5 * (r.per_tap.at(1) + r.per_tap.at(2)), 1e-15);
}

namespace {

Batch batch(std::size_t ns, std::size_t nu, std::uint64_t seed) {
  Batch b;
  for (std::size_t i = 0; i < ns; ++i) {
    const Problem pb = problem(seed + i);
    b.supervised.push_back({zero_filled_recon(pb.op, pb.y), pb.x});
  }
  for (std::size_t i = 0; i < nu; ++i) {
    Problem pb = problem(seed + 100 + i);
    b.unsupervised.push_back({pb.y, pb.op, motion_plan(0.3, 0.4 + 0.1 * i, -0.2)});
  }
  return b;
}

}  // namespace

TEST(TotalLoss, LambdaZeroMatchesSupervisedOnly) {
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  const ModelParameters p = net.initialize(3);
  const Batch full = batch(2, 2, 10);
  Batch sup_only = full;
  sup_only.unsupervised.clear();
  LossConfig zero;
  zero.lambda = 0.0;
  std::vector<double> g1(p.size()), g2(p.size());
  const auto a = total_loss(net, p, full, zero, g1);
  const auto b = total_loss(net, p, sup_only, zero, g2);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(g1, g2);
  EXPECT_GT(a.consistency, 0.0);
}

TEST(TotalLoss, NoUnsupervisedItems) {
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  const ModelParameters p = net.initialize(3);
  const auto r = total_loss(net, p, batch(2, 0, 20), LossConfig{});
  EXPECT_EQ(r.consistency, 0.0);
  EXPECT_EQ(r.total, r.supervised);
}

TEST(TotalLoss, CombinesMeans) {
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  const ModelParameters p = net.initialize(3);
  const Batch b = batch(2, 3, 30);
  LossConfig cfg;
  cfg.lambda = 0.25;
  const auto r = total_loss(net, p, b, cfg);
  double sup = 0.0, cons = 0.0;
  for (const auto& s : b.supervised) sup += supervised_loss(net.forward(p, s.input, nullptr), s.target);
  for (const auto& u : b.unsupervised)
    cons += consistency_loss(net, p, u.kspace, u.op, u.plan, cfg.consistency).loss;
  EXPECT_NEAR(r.supervised, sup / 2.0, 1e-14);
  EXPECT_NEAR(r.consistency, cons / 3.0, 1e-14);
  EXPECT_NEAR(r.total, sup / 2.0 + 0.25 * cons / 3.0, 1e-14);
}

TEST(TotalLoss, IndependentOfWorkerCount) {
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  const ModelParameters p = net.initialize(3);
  const Batch b = batch(3, 3, 40);
  std::vector<double> g1(p.size()), g4(p.size());
  const auto a = total_loss(net, p, b, LossConfig{}, g1, 1);
  const auto c = total_loss(net, p, b, LossConfig{}, g4, 4);
  EXPECT_EQ(a.total, c.total);
  EXPECT_EQ(g1, g4);
}

TEST(TotalLoss, RejectsNegativeLambda) {
  const UNet net(ModelConfig{1, 2, {1}, 0.01});
  LossConfig cfg;
  cfg.lambda = -1.0;
  EXPECT_THROW(total_loss(net, net.initialize(1), batch(1, 0, 1), cfg), InvalidArgument);
}
