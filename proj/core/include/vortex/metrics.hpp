#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "vortex/tensor.hpp"

namespace vortex {

// Returned by cpsnr when the prediction equals the reference exactly.
inline constexpr double kCpsnrInfinite = std::numeric_limits<double>::infinity();

// 20 log10( max|x_ref| / ||x_pred - x_ref||_2 ), complex l2 norm.
double cpsnr(const ComplexTensor& pred, const ComplexTensor& ref);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean local SSIM of magnitude images over all valid window positions,
// Gaussian-weighted, with L = max(ref). The inputs are stacks of `slices`
// H x W planes; windows never cross plane boundaries and the mean runs over
// every window of every plane.
double ssim(std::span<const double> pred, std::span<const double> ref, std::size_t slices,
            std::size_t h, std::size_t w, const SsimOptions& options = {});

inline double ssim(std::span<const double> pred, std::span<const double> ref, std::size_t h,
                   std::size_t w, const SsimOptions& options = {}) {
  return ssim(pred, ref, 1, h, w, options);
}

// Normalized 1D Gaussian taps of length options.window.
std::vector<double> gaussian_window(const SsimOptions& options);

}  // namespace vortex
