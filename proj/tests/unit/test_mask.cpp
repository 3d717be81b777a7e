#include <gtest/gtest.h>

#include "vortex/error.hpp"
#include "vortex/forward.hpp"
#include "vortex/rng.hpp"

using namespace vortex;

TEST(PoissonMask, SampleCountWithinFivePercent) {
  for (double r : {2.0, 4.0, 8.0})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const UndersamplingMask m = make_poisson_disc_mask(32, 32, r, {6, 6}, seed);
      const double target = 32.0 * 32.0 / r;
      EXPECT_LE(std::abs(static_cast<double>(m.count()) - target), 0.05 * target)
          << "R=" << r << " seed=" << seed;
    }
}

TEST(PoissonMask, CalibrationBlockFullySampled) {
  const UndersamplingMask m = make_poisson_disc_mask(32, 32, 8.0, {6, 6}, 3);
  for (std::size_t i = 13; i < 19; ++i)
    for (std::size_t j = 13; j < 19; ++j) EXPECT_TRUE(m.acquired(i, j)) << i << "," << j;
}

TEST(PoissonMask, DeterministicPerSeed) {
  EXPECT_EQ(make_poisson_disc_mask(32, 32, 4.0, {6, 6}, 11),
            make_poisson_disc_mask(32, 32, 4.0, {6, 6}, 11));
  EXPECT_NE(make_poisson_disc_mask(32, 32, 4.0, {6, 6}, 11).bits,
            make_poisson_disc_mask(32, 32, 4.0, {6, 6}, 12).bits);
}

TEST(PoissonMask, NonSquareGrid) {
  const UndersamplingMask m = make_poisson_disc_mask(24, 40, 4.0, {4, 4}, 1);
  EXPECT_EQ(m.height, 24u);
  EXPECT_EQ(m.width, 40u);
  EXPECT_LE(std::abs(static_cast<double>(m.count()) - 240.0), 12.0);
}

TEST(PoissonMask, RejectsBadArguments) {
  EXPECT_THROW(make_poisson_disc_mask(16, 16, 0.5, {4, 4}, 1), InvalidArgument);
  EXPECT_THROW(make_poisson_disc_mask(16, 16, 1.0, {4, 4}, 1), InvalidArgument);
  EXPECT_THROW(make_poisson_disc_mask(16, 16, 4.0, {17, 4}, 1), InvalidArgument);
  // Calibration alone exceeds the sample budget.
  EXPECT_THROW(make_poisson_disc_mask(16, 16, 8.0, {12, 12}, 1), InvalidArgument);
}

TEST(PoissonMask, ScanSeedIsStableHash) {
  EXPECT_EQ(scan_mask_seed(5, 9), hash64(5, 9));
  EXPECT_NE(scan_mask_seed(5, 9), scan_mask_seed(5, 10));
  EXPECT_NE(scan_mask_seed(5, 9), scan_mask_seed(6, 9));
}
