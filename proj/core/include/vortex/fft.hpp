#pragma once

#include "vortex/tensor.hpp"

namespace vortex {

// Centered, orthonormal 2D DFT over the trailing two dimensions. The zero
// frequency sits at (H/2, W/2) and the transform is unitary, so
// ifft2c(fft2c(x)) == x and Parseval holds without extra constants. Rank 3
// input is transformed plane by plane. Any H, W >= 1 is accepted.
ComplexTensor fft2c(const ComplexTensor& x);
ComplexTensor ifft2c(const ComplexTensor& x);

// In-place variants over a single H x W plane.
void fft2c_inplace(std::span<cdouble> plane, std::size_t h, std::size_t w);
void ifft2c_inplace(std::span<cdouble> plane, std::size_t h, std::size_t w);

}  // namespace vortex
