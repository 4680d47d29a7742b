#pragma once

#include "radlab/types.hpp"

#include <cstdint>
#include <random>

namespace radlab {

/// SplitMix64 finalizer; used to derive independent per-sample streams from
/// (seed, index) so results do not depend on how work is scheduled.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 1));
}

/// Deterministic random stream. Doubles are extracted from the top 53 bits of
/// the mt19937_64 output, so sequences are identical on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t seed, std::uint64_t index) : engine_(stream_seed(seed, index)) {}

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  TorusPoint<double> point() { return TorusPoint<double>{uniform01(), uniform01()}; }

  /// Uniform offset in the closed disk of the given radius.
  Vec2<double> disk(double radius) {
    const double r = radius * std::sqrt(uniform01());
    const double a = 6.283185307179586476925286766559 * uniform01();
    return Vec2<double>(r * std::cos(a), r * std::sin(a));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace radlab
