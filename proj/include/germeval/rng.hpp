#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace germeval {

/// Deterministic 64-bit generator (splitmix64). The standard library engines
/// are portable, but std::shuffle and the distributions are not specified
/// bit-for-bit across implementations, so all randomness in this project goes
/// through this type instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Unbiased draw from [0, bound) via rejection. bound must be >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    // Fisher-Yates; std::shuffle is unspecified across standard libraries.
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Mixes an arbitrary number of 64-bit values into one stream seed. Used to
/// derive independent per-model and per-draw RNG streams from a master seed
/// so results do not depend on scheduling order.
inline std::uint64_t mix_seed(std::uint64_t seed) { return Rng(seed).next_u64(); }

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t head, Rest... rest) {
  Rng r(seed ^ (0x9E3779B97F4A7C15ull + head));
  return mix_seed(r.next_u64() + head, rest...);
}

}  // namespace germeval
