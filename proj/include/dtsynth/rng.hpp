#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace dtsynth {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream, counter), so parallel generation order never matters.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;  // splitmix64
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_double();
    while (u1 == 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace dtsynth
