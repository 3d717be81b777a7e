#pragma once

#include <cstdint>
#include <vector>

#include "vortex/tensor.hpp"

namespace vortex {

// A spatial resampling of an H x W grid written as a sparse linear map:
// out[p] = sum_k weight_k * in[source_k]. Grid-exact transforms (flips,
// quarter turns, integer shifts) have a single unit tap per output pixel and
// are bit-exact. Interpolating transforms use bilinear taps with zero fill.
class ResamplingPlan {
 public:
  struct Tap {
    std::uint32_t source;
    double weight;
  };

  ResamplingPlan(std::size_t h, std::size_t w);

  static ResamplingPlan identity(std::size_t h, std::size_t w);
  static ResamplingPlan flip_horizontal(std::size_t h, std::size_t w);
  static ResamplingPlan flip_vertical(std::size_t h, std::size_t w);
  // Counter-clockwise quarter turns; requires a square grid.
  static ResamplingPlan rotate90(std::size_t n, int quarter_turns);
  // out[p] = in[sources[p]]; a negative source means zero fill.
  static ResamplingPlan permutation(std::size_t h, std::size_t w,
                                    std::span<const std::int64_t> sources);
  // Inverse-mapped affine transform about the grid center:
  // out(p) = in(M (p - c) + c + shift_in), bilinear, zero outside.
  static ResamplingPlan affine(std::size_t h, std::size_t w, const double inverse[2][2],
                               double shift_y, double shift_x);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  bool grid_exact() const { return grid_exact_; }

  void apply(std::span<const cdouble> in, std::span<cdouble> out) const;
  // Transpose map, accumulated into `in`.
  void apply_adjoint(std::span<const cdouble> out, std::span<cdouble> in) const;

  // Rank 2 or rank 3 (plane by plane).
  ComplexTensor apply(const ComplexTensor& x) const;
  ComplexTensor apply_adjoint(const ComplexTensor& y) const;

  // Composition: (this after first)(x) = this(first(x)).
  ResamplingPlan after(const ResamplingPlan& first) const;

 private:
  std::size_t h_, w_;
  bool grid_exact_ = true;
  std::vector<std::uint32_t> offsets_;  // size h*w + 1
  std::vector<Tap> taps_;
};

}  // namespace vortex
