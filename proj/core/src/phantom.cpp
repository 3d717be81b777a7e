#include "vortex/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vortex/error.hpp"

namespace vortex {
namespace {

struct Ellipse {
  double cy, cx, a, b, angle, intensity;

  bool contains(double y, double x) const {
    const double dy = y - cy, dx = x - cx;
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = (dy * c + dx * s) / a;
    const double v = (-dy * s + dx * c) / b;
    return u * u + v * v <= 1.0;
  }
};

}  // namespace

Phantom generate_phantom(std::size_t h, std::size_t w, KeyedRng& rng) {
  VORTEX_REQUIRE(h >= 16 && w >= 16, "phantom: H and W must be at least 16");
  const double hy = static_cast<double>(h), wx = static_cast<double>(w);
  const double pi = std::numbers::pi;

  std::vector<Ellipse> ellipses;
  const std::size_t count = 5 + static_cast<std::size_t>(rng.below(8));
  Ellipse body;
  body.cy = hy / 2.0 + rng.uniform(-0.05, 0.05) * hy;
  body.cx = wx / 2.0 + rng.uniform(-0.05, 0.05) * wx;
  body.a = rng.uniform(0.55, 0.8) * hy / 2.0;
  body.b = rng.uniform(0.55, 0.8) * wx / 2.0;
  body.angle = rng.uniform(-pi / 6.0, pi / 6.0);
  body.intensity = rng.uniform(0.4, 0.7);
  ellipses.push_back(body);
  for (std::size_t k = 1; k < count; ++k) {
    Ellipse e;
    const double r = 0.6 * std::sqrt(rng.uniform());
    const double t = rng.uniform(0.0, 2.0 * pi);
    e.cy = body.cy + r * body.a * std::sin(t);
    e.cx = body.cx + r * body.b * std::cos(t);
    e.a = rng.uniform(0.08, 0.35) * body.a;
    e.b = rng.uniform(0.08, 0.35) * body.b;
    e.angle = rng.uniform(-pi, pi);
    e.intensity = rng.uniform(0.1, 1.0);
    ellipses.push_back(e);
  }

  const double p0 = rng.uniform(-pi, pi);
  const double py = rng.uniform(-0.5, 0.5) * pi;
  const double px = rng.uniform(-0.5, 0.5) * pi;
  const double pxy = rng.uniform(-0.5, 0.5);

  Phantom out{ComplexTensor::image(h, w), std::vector<std::uint8_t>(h * w, 0)};
  std::vector<std::uint8_t> inside(h * w, 0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double y = static_cast<double>(i), x = static_cast<double>(j);
      double mag = 0.0;
      for (const Ellipse& e : ellipses)
        if (e.contains(y, x)) {
          mag = e.intensity;  // later ellipses paint over earlier ones
          inside[i * w + j] = 1;
        }
      if (mag == 0.0) continue;
      const double ny = 2.0 * y / (hy - 1.0) - 1.0, nx = 2.0 * x / (wx - 1.0) - 1.0;
      out.image.at(i, j) = std::polar(mag, p0 + py * ny + px * nx + pxy * ny * nx);
    }

  // Disc dilation, radius 2.
  const auto hi = static_cast<std::ptrdiff_t>(h), wi = static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t i = 0; i < hi; ++i)
    for (std::ptrdiff_t j = 0; j < wi; ++j) {
      if (!inside[i * wi + j]) continue;
      for (std::ptrdiff_t dy = -2; dy <= 2; ++dy)
        for (std::ptrdiff_t dx = -2; dx <= 2; ++dx) {
          if (dy * dy + dx * dx > 4) continue;
          const std::ptrdiff_t y = i + dy, x = j + dx;
          if (y >= 0 && y < hi && x >= 0 && x < wi) out.support[y * wi + x] = 1;
        }
    }
  return out;
}

SensitivityMaps synthesize_maps(std::size_t coils, std::size_t h, std::size_t w, KeyedRng& rng) {
  VORTEX_REQUIRE(coils >= 1, "maps: need at least one coil");
  VORTEX_REQUIRE(h >= 1 && w >= 1, "maps: empty grid");
  const double pi = std::numbers::pi;
  const double hy = static_cast<double>(h), wx = static_cast<double>(w);
  const double extent = std::max(hy, wx);
  ComplexTensor maps = ComplexTensor::coils(coils, h, w);
  const double offset = rng.uniform(0.0, 2.0 * pi);
  for (std::size_t c = 0; c < coils; ++c) {
    const double theta = offset + 2.0 * pi * static_cast<double>(c) / static_cast<double>(coils) +
                         rng.uniform(-0.15, 0.15);
    const double cy = hy / 2.0 + 0.5 * hy * std::sin(theta);
    const double cx = wx / 2.0 + 0.5 * wx * std::cos(theta);
    const double width = rng.uniform(0.45, 0.7) * extent;
    const double phase0 = rng.uniform(-pi, pi);
    const double gy = rng.uniform(-0.05, 0.05), gx = rng.uniform(-0.05, 0.05);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double dy = static_cast<double>(i) - cy, dx = static_cast<double>(j) - cx;
        const double mag = std::exp(-(dy * dy + dx * dx) / (2.0 * width * width));
        const double phase = phase0 + gy * (static_cast<double>(i) - hy / 2.0) +
                             gx * (static_cast<double>(j) - wx / 2.0);
        maps.at(c, i, j) = std::polar(mag, phase);
      }
  }
  const std::size_t n = h * w;
  for (std::size_t p = 0; p < n; ++p) {
    double rss = 0.0;
    for (std::size_t c = 0; c < coils; ++c) rss += std::norm(maps[c * n + p]);
    const double inv = 1.0 / std::sqrt(rss);
    for (std::size_t c = 0; c < coils; ++c) maps[c * n + p] *= inv;
  }
  return SensitivityMaps(std::move(maps));
}

}  // namespace vortex
