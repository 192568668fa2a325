#pragma once

// Brute-force maximizer of the log-likelihood over a cubic lattice clipped to
// the closed unit ball. Lattice points outside the ball are pulled radially
// onto the sphere so that pure states are candidates too.
//
// Ties are broken by smallest |r|, then lexicographically on (r1, r2, r3).
// That makes the comparison a strict total order, so the OpenMP kernel and
// the serial reference return the same point.

#include <cstddef>

#include "sgtomo/estimator.hpp"

namespace sgtomo {

struct GridOracleResult {
  Vec3 r;
  double log_likelihood;
  std::size_t points; // lattice points evaluated
};

/// OpenMP kernel.
GridOracleResult grid_oracle(RecordSpan records, double resolution);

/// Single-threaded reference implementation.
GridOracleResult grid_oracle_serial(RecordSpan records, double resolution);

} // namespace sgtomo
