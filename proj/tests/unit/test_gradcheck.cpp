#include <gtest/gtest.h>

#include <cmath>

#include "vortex/gradcheck.hpp"

using namespace vortex;

class AllLosses : public ::testing::TestWithParam<CheckedLoss> {};

TEST_P(AllLosses, AnalyticMatchesNumeric) {
  const GradientCheckReport r = gradient_check(ModelConfig{2, 3, {1, 2}, 0.01}, GetParam());
  for (const auto& f : r.failures())
    ADD_FAILURE() << "param " << f.index << " analytic " << f.analytic << " numeric " << f.numeric;
  EXPECT_TRUE(r.passed) << to_string(GetParam()) << " max rel " << r.max_rel_error;
  EXPECT_EQ(r.entries.size(), GradientCheckOptions{}.samples);
}

INSTANTIATE_TEST_SUITE_P(Gradients, AllLosses,
                         ::testing::Values(CheckedLoss::kZero, CheckedLoss::kSupervisedL1,
                                           CheckedLoss::kInvariantConsistency,
                                           CheckedLoss::kEquivariantConsistency,
                                           CheckedLoss::kLatentConsistency, CheckedLoss::kTotal));

TEST(GradientCheck, DetectsAWrongGradient) {
  const ModelParameters at{{0.3, -0.7, 1.1, 0.2}};
  const ScalarLoss loss = [](const ModelParameters& p) {
    double s = 0.0;
    for (double v : p.values) s += std::sin(v) * v;
    return s;
  };
  const LossGradient right = [](const ModelParameters& p) {
    std::vector<double> g;
    for (double v : p.values) g.push_back(std::cos(v) * v + std::sin(v));
    return g;
  };
  const LossGradient wrong = [&](const ModelParameters& p) {
    auto g = right(p);
    g[2] *= 1.01;
    return g;
  };
  GradientCheckOptions opts;
  opts.samples = 4;
  EXPECT_TRUE(gradient_check(at, loss, right, opts).passed);
  const auto bad = gradient_check(at, loss, wrong, opts);
  EXPECT_FALSE(bad.passed);
  ASSERT_EQ(bad.failures().size(), 1u);
  EXPECT_EQ(bad.failures()[0].index, 2u);
}
