#pragma once

#include <cstdint>
#include <random>

namespace rtreserve {

/// Seeded 64-bit Mersenne Twister with a platform-independent mapping to
/// doubles. std::uniform_real_distribution is avoided because its output is
/// library-specific, which would break bit-identical trajectories.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw on [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rtreserve
