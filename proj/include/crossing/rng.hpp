#pragma once

#include <cstdint>
#include <random>

namespace crossing {

// Seeded generator with hand-rolled distributions. std::uniform_real_distribution
// is implementation-specified; drawing bits directly keeps every scenario
// reproducible from its seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer in [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    return lo + engine_() % span;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crossing
