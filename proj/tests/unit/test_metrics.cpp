#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "vortex/error.hpp"
#include "vortex/metrics.hpp"

using namespace vortex;

TEST(Cpsnr, ZeroDbWhenErrorNormEqualsPeak) {
  ComplexTensor ref({4, 4});
  ref[3] = cdouble(0.0, 2.0);
  ref[5] = 1.0;
  ComplexTensor pred = ref;
  pred[10] += cdouble(1.2, 1.6);
  EXPECT_NEAR(cpsnr(pred, ref), 0.0, 1e-12);
  pred[10] += cdouble(1.2, 1.6);
  EXPECT_NEAR(cpsnr(pred, ref), -20.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(-20.0 * std::log10(2.0), -6.0206, 1e-4);
}

TEST(Cpsnr, GlobalPhaseInvariant) {
  const ComplexTensor ref = test::random_tensor({8, 8}, 1);
  const ComplexTensor pred = test::random_tensor({8, 8}, 2);
  const cdouble rot = std::polar(1.0, 0.77);
  EXPECT_NEAR(cpsnr(rot * pred, rot * ref), cpsnr(pred, ref), 1e-12);
}

TEST(Cpsnr, EdgeCases) {
  const ComplexTensor ref = test::random_tensor({4, 4}, 3);
  EXPECT_EQ(cpsnr(ref, ref), kCpsnrInfinite);
  EXPECT_THROW(cpsnr(ref, ComplexTensor({4, 4})), InvalidArgument);
  EXPECT_THROW(cpsnr(ref, test::random_tensor({4, 5}, 3)), InvalidArgument);
}


TEST(Ssim, MatchesNaiveOracle) {
  const auto ref = test::random_image(256, 1);
  auto pred = ref;
  const auto noise = test::random_image(256, 2);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += 0.3 * (noise[i] - 0.5);
  EXPECT_NEAR(ssim(pred, ref, 16, 16), test::naive_ssim(pred, ref, 16, 16), 1e-8);
  const auto other = test::random_image(16 * 20, 3), ref2 = test::random_image(16 * 20, 4);
  EXPECT_NEAR(ssim(other, ref2, 16, 20), test::naive_ssim(other, ref2, 16, 20), 1e-8);
}

TEST(Ssim, IdenticalImagesScoreOneExactly) {
  const auto m = test::random_image(24 * 24, 5);
  EXPECT_EQ(ssim(m, m, 24, 24), 1.0);
}

TEST(Ssim, BoundedByOne) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = test::random_image(256, 10 + s), b = test::random_image(256, 50 + s);
    const double v = ssim(a, b, 16, 16);
    EXPECT_LE(v, 1.0);
    EXPECT_GE(v, -1.0);
  }
}

TEST(Ssim, StackAveragesEveryPlane) {
  // Both planes share the reference peak so L is the same per plane.
  const auto a = test::random_image(2 * 256, 7);
  auto b = test::random_image(2 * 256, 8);
  b[10] = b[256 + 10] = 1.0;
  const std::span<const double> sa(a), sb(b);
  const double first = ssim(sa.subspan(0, 256), sb.subspan(0, 256), 16, 16);
  const double second = ssim(sa.subspan(256), sb.subspan(256), 16, 16);
  EXPECT_NEAR(ssim(a, b, 2, 16, 16), 0.5 * (first + second), 1e-14);
}

TEST(Ssim, RejectsTooSmallImages) {
  const auto a = test::random_image(100, 1);
  EXPECT_THROW(ssim(a, a, 10, 10), InvalidArgument);
  EXPECT_THROW(ssim(a, std::vector<double>(100, 0.0), 10, 10), InvalidArgument);
}

TEST(Ssim, GaussianWindowIsNormalized) {
  const auto g = gaussian_window({});
  ASSERT_EQ(g.size(), 11u);
  double s = 0.0;
  for (double v : g) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(g[0], g[10]);
}
