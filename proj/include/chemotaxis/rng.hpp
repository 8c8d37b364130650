#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chemotaxis {

/// Counter-based normal variates.
///
/// Each draw is a pure function of (seed, stream, counter): no generator state
/// is carried between nodes, so any node can be initialized independently and
/// in any order. Bits come from the SplitMix64 finalizer chained over the key:
///
///   h = mix(seed ^ 0x6a09e667f3bcc909)
///   h = mix(h ^ (stream << 32 | counter))
///   b = mix(h + slot * 0x9e3779b97f4a7c15)      slot = 1, 2
///
/// and the two 53-bit uniforms feed a Box-Muller transform (cosine branch).
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint32_t stream, std::uint32_t counter, std::uint64_t slot) const noexcept {
    std::uint64_t h = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    h = mix(h ^ ((static_cast<std::uint64_t>(stream) << 32) | counter));
    return mix(h + slot * 0x9e3779b97f4a7c15ULL);
  }

  /// Standard normal for (stream, counter).
  double normal(std::uint32_t stream, std::uint32_t counter) const {
    constexpr double scale = 0x1.0p-53;
    const double u1 = static_cast<double>((bits(stream, counter, 1) >> 11) + 1) * scale;  // (0, 1]
    const double u2 = static_cast<double>(bits(stream, counter, 2) >> 11) * scale;        // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace chemotaxis
