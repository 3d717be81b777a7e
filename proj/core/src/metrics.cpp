#include "vortex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vortex/error.hpp"

namespace vortex {

double cpsnr(const ComplexTensor& pred, const ComplexTensor& ref) {
  VORTEX_REQUIRE(same_shape(pred, ref), "cpsnr: shape mismatch");
  const double peak = max_abs(ref);
  VORTEX_REQUIRE(peak > 0.0, "cpsnr: reference is identically zero");
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) err += std::norm(pred[i] - ref[i]);
  if (err == 0.0) return kCpsnrInfinite;
  return 20.0 * std::log10(peak / std::sqrt(err));
}

std::vector<double> gaussian_window(const SsimOptions& o) {
  std::vector<double> g(o.window);
  const double c = (static_cast<double>(o.window) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < o.window; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * o.sigma * o.sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

namespace {

// Separable valid-mode filtering of one plane.
std::vector<double> filter_valid(const double* x, std::size_t h, std::size_t w,
                                 const std::vector<double>& g) {
  const std::size_t k = g.size(), oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += g[t] * x[i * w + j + t];
      rows[i * ow + j] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += g[t] * rows[(i + t) * ow + j];
      out[i * ow + j] = s;
    }
  return out;
}

}  // namespace

double ssim(std::span<const double> pred, std::span<const double> ref, std::size_t slices,
            std::size_t h, std::size_t w, const SsimOptions& o) {
  VORTEX_REQUIRE(pred.size() == ref.size() && ref.size() == slices * h * w,
                 "ssim: shape mismatch");
  VORTEX_REQUIRE(o.window >= 1 && o.sigma > 0.0, "ssim: bad window");
  VORTEX_REQUIRE(slices >= 1 && h >= o.window && w >= o.window,
                 "ssim: image smaller than the window");
  const double peak = *std::max_element(ref.begin(), ref.end());
  VORTEX_REQUIRE(peak > 0.0, "ssim: reference is identically zero");
  const double c1 = (o.k1 * peak) * (o.k1 * peak);
  const double c2 = (o.k2 * peak) * (o.k2 * peak);
  const auto g = gaussian_window(o);
  const std::size_t n = h * w;

  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t s = 0; s < slices; ++s) {
    const double* x = pred.data() + s * n;
    const double* y = ref.data() + s * n;
    for (std::size_t p = 0; p < n; ++p) {
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, h, w, g), my = filter_valid(y, h, w, g);
    const auto exx = filter_valid(xx.data(), h, w, g), eyy = filter_valid(yy.data(), h, w, g),
               exy = filter_valid(xy.data(), h, w, g);
    for (std::size_t p = 0; p < mx.size(); ++p) {
      const double vx = exx[p] - mx[p] * mx[p];
      const double vy = eyy[p] - my[p] * my[p];
      const double cov = exy[p] - mx[p] * my[p];
      const double num = (2.0 * mx[p] * my[p] + c1) * (2.0 * cov + c2);
      const double den = (mx[p] * mx[p] + my[p] * my[p] + c1) * (vx + vy + c2);
      total += num / den;
    }
    count += mx.size();
  }
  return total / static_cast<double>(count);
}

}  // namespace vortex
