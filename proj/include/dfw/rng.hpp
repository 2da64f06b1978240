#pragma once

#include <cstdint>

namespace dfw {

/// Counter-based SplitMix64 stream.
///
/// The k-th output (k = 0, 1, ...) is mix(seed + (k + 1) * 0x9E3779B97F4A7C15), so any
/// implementation of the same finalizer reproduces the stream bit for bit. Test vectors
/// live in tests/test_rng.cpp.
class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-counter";

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two raw draws per call.
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace dfw
