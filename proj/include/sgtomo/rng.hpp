#pragma once

// Counter-based random numbers for reproducible simulation.
//
// The generator is SplitMix64 used in counter mode: draw k of the stream with
// key K is mix64(K + (k + 1) * 0x9E3779B97F4A7C15), where mix64 is the
// SplitMix64 finalizer (Steele, Lea & Flood 2014). Streams carry no hidden
// state beyond (key, counter), so any stream can be recreated from its key and
// independent streams are derived by hashing (parent key, index).

#include <cstdint>

namespace sgtomo {

struct RngSeed {
  std::uint64_t value = 0;
};

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key of child stream `index` under `parent`.
RngSeed derive_stream(RngSeed parent, std::uint64_t index);

class CounterRng {
public:
  explicit CounterRng(RngSeed key) : key_(key.value) {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller (consumes two draws).
  double normal();

  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Binomial(n, p) by inverse CDF evaluated at the uniform variate `u` in [0, 1).
///
/// The pmf is built by the ratio recurrence outward from the mode, so only
/// IEEE +, *, / are involved and the result is identical on every conforming
/// platform. Terms below 1e-20 of the modal weight are dropped; the neglected
/// mass is far below the 2^-53 resolution of `u`.
std::int64_t binomial_inverse_cdf(std::int64_t n, double p, double u);

} // namespace sgtomo
