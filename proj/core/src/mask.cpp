#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortex/error.hpp"
#include "vortex/forward.hpp"
#include "vortex/rng.hpp"

namespace vortex {
namespace {

constexpr int kCandidatesPerPoint = 30;
constexpr double kCountTolerance = 0.05;
constexpr int kBisectionSteps = 48;
constexpr int kSeedAttempts = 16;

struct Point {
  double y, x;
};

// Bridson's dart throwing over [-0.5, H-0.5) x [-0.5, W-0.5) so that
// rounding a sample lands on a valid pixel.
std::vector<Point> bridson(std::size_t h, std::size_t w, double radius, KeyedRng& rng) {
  const double cell = radius / std::sqrt(2.0);
  const double y0 = -0.5, x0 = -0.5;
  const double hy = static_cast<double>(h), wx = static_cast<double>(w);
  const auto gh = static_cast<std::size_t>(std::ceil(hy / cell)) + 1;
  const auto gw = static_cast<std::size_t>(std::ceil(wx / cell)) + 1;
  std::vector<int> grid(gh * gw, -1);
  std::vector<Point> points;
  std::vector<std::size_t> active;

  auto cell_of = [&](const Point& p) {
    return std::make_pair(static_cast<std::size_t>((p.y - y0) / cell),
                          static_cast<std::size_t>((p.x - x0) / cell));
  };
  auto insert = [&](const Point& p) {
    auto [gy, gx] = cell_of(p);
    grid[gy * gw + gx] = static_cast<int>(points.size());
    active.push_back(points.size());
    points.push_back(p);
  };
  auto far_enough = [&](const Point& p) {
    auto [gy, gx] = cell_of(p);
    const std::size_t ylo = gy >= 2 ? gy - 2 : 0, xlo = gx >= 2 ? gx - 2 : 0;
    const std::size_t yhi = std::min(gh - 1, gy + 2), xhi = std::min(gw - 1, gx + 2);
    for (std::size_t yy = ylo; yy <= yhi; ++yy)
      for (std::size_t xx = xlo; xx <= xhi; ++xx) {
        const int idx = grid[yy * gw + xx];
        if (idx < 0) continue;
        const double dy = points[idx].y - p.y, dx = points[idx].x - p.x;
        if (dy * dy + dx * dx < radius * radius) return false;
      }
    return true;
  };

  insert({y0 + rng.uniform() * hy, x0 + rng.uniform() * wx});
  while (!active.empty()) {
    const std::size_t slot = rng.below(active.size());
    const Point base = points[active[slot]];
    bool placed = false;
    for (int k = 0; k < kCandidatesPerPoint; ++k) {
      const double r = radius * (1.0 + rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const Point cand{base.y + r * std::sin(theta), base.x + r * std::cos(theta)};
      if (cand.y < y0 || cand.y >= y0 + hy || cand.x < x0 || cand.x >= x0 + wx) continue;
      if (!far_enough(cand)) continue;
      insert(cand);
      placed = true;
      break;
    }
    if (!placed) {
      active[slot] = active.back();
      active.pop_back();
    }
  }
  return points;
}

std::size_t rasterize(std::size_t h, std::size_t w, CalibrationSize cal, double radius,
                      std::uint64_t seed, std::vector<std::uint8_t>& bits) {
  KeyedRng rng(seed);
  bits.assign(h * w, 0);
  for (const Point& p : bridson(h, w, radius, rng)) {
    const auto i = static_cast<std::size_t>(
        std::clamp(std::floor(p.y + 0.5), 0.0, static_cast<double>(h - 1)));
    const auto j = static_cast<std::size_t>(
        std::clamp(std::floor(p.x + 0.5), 0.0, static_cast<double>(w - 1)));
    bits[i * w + j] = 1;
  }
  const std::size_t i0 = h / 2 - cal.height / 2;
  const std::size_t j0 = w / 2 - cal.width / 2;
  for (std::size_t i = i0; i < i0 + cal.height; ++i)
    for (std::size_t j = j0; j < j0 + cal.width; ++j) bits[i * w + j] = 1;
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

}  // namespace

UndersamplingMask make_poisson_disc_mask(std::size_t h, std::size_t w, double acceleration,
                                         CalibrationSize calibration, std::uint64_t seed) {
  VORTEX_REQUIRE(h >= 1 && w >= 1, "mask: empty grid");
  VORTEX_REQUIRE(acceleration > 1.0, "mask: acceleration must exceed 1");
  VORTEX_REQUIRE(calibration.height <= h && calibration.width <= w,
                 "mask: calibration block larger than grid");
  const double target = static_cast<double>(h * w) / acceleration;
  VORTEX_REQUIRE(target >= static_cast<double>(calibration.height * calibration.width),
                 "mask: calibration block exceeds the sampling budget H*W/R");
  const double lo_count = (1.0 - kCountTolerance) * target;
  const double hi_count = (1.0 + kCountTolerance) * target;

  UndersamplingMask mask;
  mask.height = h;
  mask.width = w;
  mask.acceleration = acceleration;
  mask.calibration = calibration;
  mask.seed = seed;

  std::vector<std::uint8_t> bits;
  for (int attempt = 0; attempt < kSeedAttempts; ++attempt) {
    const std::uint64_t trial_seed = attempt == 0 ? seed : hash64(seed, attempt);
    double r_lo = 0.25;
    double r_hi = std::sqrt(static_cast<double>(h * h + w * w));
    for (int step = 0; step < kBisectionSteps; ++step) {
      const double r = 0.5 * (r_lo + r_hi);
      const auto n = static_cast<double>(rasterize(h, w, calibration, r, trial_seed, bits));
      if (n >= lo_count && n <= hi_count) {
        mask.bits = std::move(bits);
        return mask;
      }
      if (n > hi_count)
        r_lo = r;
      else
        r_hi = r;
    }
  }
  throw std::runtime_error("mask: Poisson-disc bisection did not reach the target count");
}

}  // namespace vortex
