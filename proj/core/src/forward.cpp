#include "vortex/forward.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "vortex/error.hpp"
#include "vortex/fft.hpp"
#include "vortex/rng.hpp"

namespace vortex {

SensitivityMaps::SensitivityMaps(ComplexTensor maps) : maps_(std::move(maps)) {
  VORTEX_REQUIRE(maps_.rank() == 3, "sensitivity maps must be C x H x W");
  VORTEX_REQUIRE(maps_.dim(0) >= 1, "sensitivity maps need at least one coil");
}

std::vector<double> SensitivityMaps::rss_squared() const {
  const std::size_t n = height() * width();
  std::vector<double> rss(n, 0.0);
  for (std::size_t c = 0; c < coils(); ++c) {
    auto plane = maps_.plane(c);
    for (std::size_t p = 0; p < n; ++p) rss[p] += std::norm(plane[p]);
  }
  return rss;
}

UndersamplingMask UndersamplingMask::full(std::size_t h, std::size_t w) {
  UndersamplingMask m;
  m.height = h;
  m.width = w;
  m.acceleration = 1.0;
  m.calibration = {h, w};
  m.bits.assign(h * w, 1);
  return m;
}

std::size_t UndersamplingMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

ForwardOperator::ForwardOperator(SensitivityMaps maps, UndersamplingMask mask)
    : maps_(std::move(maps)), mask_(std::move(mask)) {
  VORTEX_REQUIRE(maps_.height() == mask_.height && maps_.width() == mask_.width,
                 "forward operator: maps and mask disagree on H x W");
  VORTEX_REQUIRE(mask_.bits.size() == mask_.height * mask_.width,
                 "forward operator: mask storage does not match its shape");
}

KSpaceTensor apply_mask(const UndersamplingMask& mask, const KSpaceTensor& y) {
  VORTEX_REQUIRE(y.rank() == 3 && y.height() == mask.height && y.width() == mask.width,
                 "apply_mask: shape mismatch");
  KSpaceTensor out = y;
  const std::size_t n = mask.height * mask.width;
  for (std::size_t c = 0; c < y.dim(0); ++c) {
    auto plane = out.plane(c);
    for (std::size_t p = 0; p < n; ++p)
      if (!mask.bits[p]) plane[p] = cdouble{0.0, 0.0};
  }
  return out;
}

KSpaceTensor forward_apply(const ForwardOperator& op, const ComplexTensor& x) {
  VORTEX_REQUIRE(x.rank() == 2 && x.dim(0) == op.height() && x.dim(1) == op.width(),
                 "forward_apply: image shape does not match operator");
  const std::size_t h = op.height(), w = op.width(), n = h * w;
  KSpaceTensor y = KSpaceTensor::coils(op.coils(), h, w);
  const auto& mask = op.mask().bits;
  for (std::size_t c = 0; c < op.coils(); ++c) {
    auto plane = y.plane(c);
    auto s = op.maps().tensor().plane(c);
    for (std::size_t p = 0; p < n; ++p) plane[p] = s[p] * x[p];
    fft2c_inplace(plane, h, w);
    for (std::size_t p = 0; p < n; ++p)
      if (!mask[p]) plane[p] = cdouble{0.0, 0.0};
  }
  return y;
}

ComplexTensor adjoint_apply(const ForwardOperator& op, const KSpaceTensor& y) {
  VORTEX_REQUIRE(y.rank() == 3 && y.dim(0) == op.coils() && y.dim(1) == op.height() &&
                     y.dim(2) == op.width(),
                 "adjoint_apply: k-space shape does not match operator");
  const std::size_t h = op.height(), w = op.width(), n = h * w;
  ComplexTensor x = ComplexTensor::image(h, w);
  const auto& mask = op.mask().bits;
  std::vector<cdouble> buf(n);
  for (std::size_t c = 0; c < op.coils(); ++c) {
    auto plane = y.plane(c);
    for (std::size_t p = 0; p < n; ++p) buf[p] = mask[p] ? plane[p] : cdouble{0.0, 0.0};
    ifft2c_inplace(buf, h, w);
    auto s = op.maps().tensor().plane(c);
    for (std::size_t p = 0; p < n; ++p) x[p] += std::conj(s[p]) * buf[p];
  }
  return x;
}

ComplexTensor zero_filled_recon(const ForwardOperator& op, const KSpaceTensor& y) {
  return adjoint_apply(op, y);
}

std::uint64_t scan_mask_seed(std::uint64_t dataset_seed, std::uint64_t scan_id) {
  return hash64(dataset_seed, scan_id);
}

}  // namespace vortex
