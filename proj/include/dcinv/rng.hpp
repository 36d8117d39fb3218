#pragma once

#include <cstdint>

namespace dcinv {

/// Counter-based pseudo-random stream (SplitMix64 core).
///
/// Every stream is a pure function of (seed, stream_id, draw index), so
/// records, samples, and workers can each own an independent stream and
/// reproduce it without sharing mutable state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix(seed ^ mix(0x6a09e667f3bcc909ULL + stream_id))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform draw in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Symmetric draw in [-half_width, half_width).
  double symmetric(double half_width) {
    return uniform(-half_width, half_width);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace dcinv
