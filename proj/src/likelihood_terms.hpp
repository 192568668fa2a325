#pragma once

// Flattened record data shared by the estimator and the grid oracle.

#include <cmath>
#include <limits>
#include <vector>

#include "sgtomo/estimator.hpp"

namespace sgtomo::detail {

struct Terms {
  std::vector<Vec3> a;
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> n_plus;
  std::vector<double> n_minus;

  std::size_t size() const { return a.size(); }
};

inline Terms flatten(RecordSpan records) {
  Terms t;
  const std::size_t m = records.size();
  t.a.reserve(m);
  t.x.reserve(m);
  t.n_plus.reserve(m);
  t.n_minus.reserve(m);
  for (const auto& rec : records) {
    t.a.push_back(rec.direction().vec());
    t.x.push_back(rec.x);
    t.n_plus.push_back(static_cast<double>(rec.n_plus));
    t.n_minus.push_back(static_cast<double>(rec.n_minus));
  }
  t.w = record_weights(records);
  return t;
}

// count * ln(base) with 0 * ln(0) = 0.
inline double weighted_log(double count, double base) {
  if (count == 0.0) return 0.0;
  if (base <= 0.0) return -std::numeric_limits<double>::infinity();
  return count * std::log(base);
}

inline double log_likelihood_at(const Terms& t, const Vec3& r) {
  double sum = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double u = t.a[j].dot(r);
    sum += weighted_log(t.n_plus[j], 1.0 + u);
    sum += weighted_log(t.n_minus[j], 1.0 - u);
  }
  return sum;
}

} // namespace sgtomo::detail
