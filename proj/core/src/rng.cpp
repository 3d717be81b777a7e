#include "vortex/rng.hpp"

#include <cmath>
#include <numbers>

namespace vortex {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash64(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ mix64(a + 0x632be59bd9b4e019ULL));
}

std::uint64_t hash64(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return hash64(hash64(seed, a), b);
}

std::uint64_t hash64(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash64(hash64(seed, a, b), c);
}

double KeyedRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double KeyedRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t KeyedRng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % n;
}

}  // namespace vortex
