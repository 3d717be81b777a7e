#include <gtest/gtest.h>

#include <cmath>

#include "vortex/curriculum.hpp"
#include "vortex/error.hpp"

using namespace vortex;

TEST(Curriculum, LinearEndpointsExact) {
  CurriculumSchedule s{CurriculumKind::kLinear, 40.0, 5.0, 0.2, 0.5};
  EXPECT_EQ(curriculum_beta(s, 0.0), 0.0);
  EXPECT_EQ(curriculum_beta(s, 40.0), 1.0);
  EXPECT_DOUBLE_EQ(curriculum_beta(s, 10.0), 0.25);
  EXPECT_EQ(curriculum_beta(s, 400.0), 1.0);
}

TEST(Curriculum, ExponentialMatchesClosedForm) {
  // tau = M / gamma = 40: (1 - e^{-100/40}) / (1 - e^{-200/40})
  const double oracle = (1.0 - std::exp(-2.5)) / (1.0 - std::exp(-5.0));
  EXPECT_NEAR(exponential_beta(100.0, 200.0, 5.0), oracle, 1e-12);
  EXPECT_NEAR(oracle, 0.924142, 1e-6);
  EXPECT_EQ(exponential_beta(0.0, 200.0, 5.0), 0.0);
  EXPECT_EQ(exponential_beta(200.0, 200.0, 5.0), 1.0);
}

TEST(Curriculum, ExponentialIsMonotone) {
  double prev = -1.0;
  for (int t = 0; t <= 60; ++t) {
    const double b = exponential_beta(t, 50.0, 5.0);
    EXPECT_GE(b, prev);
    prev = b;
  }
}

TEST(Curriculum, UpperBoundConstantAfterM) {
  for (CurriculumKind k : {CurriculumKind::kLinear, CurriculumKind::kExponential}) {
    CurriculumSchedule s{k, 25.0, 5.0, 0.2, 0.5};
    const double at_m = schedule_difficulty(s, 25.0);
    EXPECT_EQ(at_m, 0.5);
    for (double t : {26.0, 50.0, 1000.0}) EXPECT_EQ(schedule_difficulty(s, t), at_m);
  }
}

TEST(Curriculum, NoneIsConstant) {
  CurriculumSchedule s{CurriculumKind::kNone, 1.0, 5.0, 0.1, 0.3};
  EXPECT_EQ(schedule_difficulty(s, 0.0), 0.3);
  EXPECT_EQ(schedule_difficulty(s, 7.0), 0.3);
}

TEST(Curriculum, ProbabilityRamp) {
  CurriculumSchedule s{CurriculumKind::kExponential, 200.0, 5.0, 0.0, 0.0};
  const double oracle = 0.2 * (1.0 - std::exp(-2.5)) / (1.0 - std::exp(-5.0));
  EXPECT_NEAR(schedule_probability(0.2, 100.0, s), oracle, 1e-12);
  EXPECT_EQ(schedule_probability(0.2, 0.0, s), 0.0);
  EXPECT_NEAR(schedule_probability(0.2, 300.0, s), 0.2, 1e-15);
}

TEST(Curriculum, Validation) {
  EXPECT_THROW((CurriculumSchedule{CurriculumKind::kLinear, 0.0, 5.0, 0.0, 1.0}.validate()),
               InvalidArgument);
  EXPECT_THROW((CurriculumSchedule{CurriculumKind::kExponential, 10.0, 0.0, 0.0, 1.0}.validate()),
               InvalidArgument);
  EXPECT_THROW((CurriculumSchedule{CurriculumKind::kLinear, 10.0, 5.0, 0.5, 0.1}.validate()),
               InvalidArgument);
  EXPECT_THROW(exponential_beta(-1.0, 10.0, 5.0), InvalidArgument);
  EXPECT_EQ(parse_curriculum_kind("exponential"), CurriculumKind::kExponential);
  EXPECT_THROW(parse_curriculum_kind("cosine"), InvalidArgument);
}
