#pragma once

#include <cstdint>
#include <random>

namespace vortex {

// splitmix64 finalizer; stable across platforms.
std::uint64_t mix64(std::uint64_t x);

// Order-sensitive combination of a seed with further key words:
// hash64(s, a, b) = mix64(mix64(mix64(s) ^ a') ^ b') with a' = mix64(a + k).
std::uint64_t hash64(std::uint64_t seed, std::uint64_t a);
std::uint64_t hash64(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t hash64(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Deterministic random stream derived from a key. Two streams built from the
// same key yield the same draws on every platform: the engine is the
// standard-specified mt19937_64 and all distributions are implemented here
// rather than through <random>'s implementation-defined ones.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t key) : engine_(key) {}
  KeyedRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
      : engine_(hash64(seed, a, b)) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller.
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Augmentation stream for one training example, keyed on
// (seed, epoch, example_id) so draws do not depend on batch order or worker
// count.
inline KeyedRng augmentation_rng(std::uint64_t seed, std::uint64_t epoch,
                                 std::uint64_t example_id) {
  return KeyedRng(seed, epoch, example_id);
}

}  // namespace vortex
