#include "sgtomo/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sgtomo {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
constexpr double kTailCutoff = 1e-20;
} // namespace

RngSeed derive_stream(RngSeed parent, std::uint64_t index) {
  return RngSeed{mix64(mix64(parent.value) ^ ((index + 1) * kStreamSalt))};
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  const double u1 = 1.0 - uniform(); // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t binomial_inverse_cdf(std::int64_t n, double p, double u) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0) || !(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("binomial_inverse_cdf: bad arguments");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;

  const double q = 1.0 - p;
  const double up = p / q; // pmf(k+1)/pmf(k) = (n-k)/(k+1) * p/q
  const double down = q / p;

  std::int64_t mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
  if (mode > n) mode = n;

  // Unnormalized weights, mode has weight 1.
  std::vector<double> lower; // weights for mode-1, mode-2, ...
  double w = 1.0;
  for (std::int64_t k = mode; k > 0; --k) {
    w *= static_cast<double>(k) / static_cast<double>(n - k + 1) * down;
    if (w < kTailCutoff) break;
    lower.push_back(w);
  }
  std::vector<double> upper; // weights for mode+1, mode+2, ...
  w = 1.0;
  for (std::int64_t k = mode; k < n; ++k) {
    w *= static_cast<double>(n - k) / static_cast<double>(k + 1) * up;
    if (w < kTailCutoff) break;
    upper.push_back(w);
  }

  const std::int64_t lo = mode - static_cast<std::int64_t>(lower.size());
  std::vector<double> weights;
  weights.reserve(lower.size() + 1 + upper.size());
  weights.assign(lower.rbegin(), lower.rend());
  weights.push_back(1.0);
  weights.insert(weights.end(), upper.begin(), upper.end());

  double total = 0.0;
  for (double x : weights) total += x;

  const double target = u * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (cum > target) return lo + static_cast<std::int64_t>(i);
  }
  return lo + static_cast<std::int64_t>(weights.size()) - 1;
}

} // namespace sgtomo
