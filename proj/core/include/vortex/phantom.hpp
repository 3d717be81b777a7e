#pragma once

#include <cstdint>
#include <vector>

#include "vortex/forward.hpp"
#include "vortex/rng.hpp"

namespace vortex {

struct Phantom {
  ComplexTensor image;                // magnitude in [0, 1], smooth phase
  std::vector<std::uint8_t> support;  // union of ellipses dilated by 2 px
};

// 5-12 random ellipses (a body ellipse plus overlapping structures) with a
// smooth low-order random phase. Requires H, W >= 16.
Phantom generate_phantom(std::size_t h, std::size_t w, KeyedRng& rng);

// C smooth Gaussian-lobe coil profiles centered at distinct border
// positions with linear phase ramps, normalized to unit root-sum-of-squares
// at every pixel.
SensitivityMaps synthesize_maps(std::size_t coils, std::size_t h, std::size_t w, KeyedRng& rng);

}  // namespace vortex
