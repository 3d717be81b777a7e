#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vortex/tensor.hpp"

namespace vortex {

// Multi-coil measurements (C x H x W). Undersampled data is exactly zero at
// unacquired locations.
using KSpaceTensor = ComplexTensor;

// Per-coil complex receive sensitivities, C x H x W.
class SensitivityMaps {
 public:
  SensitivityMaps() = default;
  explicit SensitivityMaps(ComplexTensor maps);

  std::size_t coils() const { return maps_.dim(0); }
  std::size_t height() const { return maps_.dim(1); }
  std::size_t width() const { return maps_.dim(2); }
  const ComplexTensor& tensor() const { return maps_; }
  ComplexTensor& tensor() { return maps_; }

  // sum_c |S_c(p)|^2 per pixel.
  std::vector<double> rss_squared() const;

  bool operator==(const SensitivityMaps&) const = default;

 private:
  ComplexTensor maps_;
};

struct CalibrationSize {
  std::size_t height = 0;
  std::size_t width = 0;
  bool operator==(const CalibrationSize&) const = default;
};

// Binary k-space sampling pattern.
struct UndersamplingMask {
  std::size_t height = 0;
  std::size_t width = 0;
  double acceleration = 1.0;
  CalibrationSize calibration;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  static UndersamplingMask full(std::size_t h, std::size_t w);

  bool acquired(std::size_t i, std::size_t j) const { return bits[i * width + j] != 0; }
  std::size_t count() const;
  bool operator==(const UndersamplingMask&) const = default;
};

// A = Omega F S. Immutable after construction.
class ForwardOperator {
 public:
  ForwardOperator(SensitivityMaps maps, UndersamplingMask mask);

  const SensitivityMaps& maps() const { return maps_; }
  const UndersamplingMask& mask() const { return mask_; }
  std::size_t coils() const { return maps_.coils(); }
  std::size_t height() const { return maps_.height(); }
  std::size_t width() const { return maps_.width(); }

 private:
  SensitivityMaps maps_;
  UndersamplingMask mask_;
};

// y_c = Omega .* fft2c(S_c .* x)
KSpaceTensor forward_apply(const ForwardOperator& op, const ComplexTensor& x);
// x = sum_c conj(S_c) .* ifft2c(Omega .* y_c)
ComplexTensor adjoint_apply(const ForwardOperator& op, const KSpaceTensor& y);
// Zero-filled reconstruction: the network input, equal to adjoint_apply.
ComplexTensor zero_filled_recon(const ForwardOperator& op, const KSpaceTensor& y);

// Zeroes every unacquired entry of every coil.
KSpaceTensor apply_mask(const UndersamplingMask& mask, const KSpaceTensor& y);

// Bridson Poisson-disc undersampling with a fully sampled centered
// calibration block. The disc radius is bisected until the number of
// sampled pixels lands within +/-5% of H*W/R. Deterministic per seed.
UndersamplingMask make_poisson_disc_mask(std::size_t h, std::size_t w, double acceleration,
                                         CalibrationSize calibration, std::uint64_t seed);

// Mask seed for one scan; all slices of the scan share it.
std::uint64_t scan_mask_seed(std::uint64_t dataset_seed, std::uint64_t scan_id);

}  // namespace vortex
