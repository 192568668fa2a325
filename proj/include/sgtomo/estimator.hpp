#pragma once

// Maximum-likelihood reconstruction of the polarization vector from
// Stern-Gerlach records.
//
// With u_j = a^j . r and per-setting weights w_j = N_j / sum_k N_k
// (w_j = 1/M when every setting uses the same N):
//
//   R(r) = sum_j w_j/2 [ (1 + X_j)/(1 + u_j) + (1 - X_j)/(1 - u_j) ]
//   K(r) = sum_j w_j/2 [ (1 + X_j)/(1 + u_j) - (1 - X_j)/(1 - u_j) ] a^j
//
// Extremal states satisfy R(r) r + K(r) = r. Since R = 1 - r.K, an interior
// fixed point has K = 0, which is the stationarity condition of the
// log-likelihood sum_j N_j [ (1+X_j)/2 ln(1+u_j) + (1-X_j)/2 ln(1-u_j) ].
// On the unit sphere the fixed points are instead those with K parallel to r.

#include <span>
#include <vector>

#include "sgtomo/algebra.hpp"
#include "sgtomo/simulator.hpp"

namespace sgtomo {

using RecordSpan = std::span<const MeasurementRecord>;

struct SolverOptions {
  double tol_k = 1e-10;
  int max_iterations = 10'000;
  double damping_min = 1e-6;
  double ball_margin = 1e-9;
  /// Record every accepted iterate; used by the ascent and span tests.
  bool keep_trace = false;

  void validate() const;
};

struct IterationTrace {
  std::vector<Vec3> iterates;         // starts with the origin
  std::vector<double> log_likelihood; // at each iterate
  std::vector<double> increments;     // log-likelihood gain of each accepted step
  std::vector<double> step_sizes;     // accepted damping factor
};

struct ReconstructionResult {
  Polarization r_est;
  int iterations = 0;
  bool converged = false;
  bool boundary = false;
  double log_likelihood = 0.0;
  /// |K(r)| for interior results, |K - (K.r^)r^| for boundary results.
  double k_residual = 0.0;
  /// R(r) at the last iterate.
  double r_value = 0.0;
  IterationTrace trace;
};

struct LinearInversionResult {
  Vec3 r;            // unclamped, may leave the unit ball
  bool out_of_ball;  // |r| > 1
};

/// Three-axis inversion r = sum_i X_i a^i. Requires exactly three records on
/// pairwise-orthogonal directions (|a^i . a^k| <= 1e-9).
LinearInversionResult linear_inversion(RecordSpan records);

/// log of the polarization-parameterized likelihood product
/// prod_j (1 + r.a^j)^{n_j+} (1 - r.a^j)^{n_j-}. Zero counts contribute
/// nothing; a positive count against a vanishing factor gives -infinity.
double log_likelihood(const Polarization& r, RecordSpan records);

/// log of the product of Born probabilities, prod_j p_j(+)^{n_j+} p_j(-)^{n_j-}.
/// Differs from log_likelihood by the constant -(sum_j N_j) ln 2.
double log_probability(const Polarization& r, RecordSpan records);

/// log_likelihood(to) - log_likelihood(from), evaluated term by term with
/// log1p so that tiny gains near the optimum keep their sign.
double log_likelihood_increment(const Vec3& from, const Vec3& to, RecordSpan records);

double compute_R(const Vec3& r, RecordSpan records);
Vec3 compute_K(const Vec3& r, RecordSpan records);

/// sum_j (X_j - u_j) / (1 - u_j^2) a^j. Equals M K(r) when all N_j are equal.
Vec3 gradient_residual(const Vec3& r, RecordSpan records);

/// Damped fixed-point iteration of r <- R(r) r + K(r) from the origin.
ReconstructionResult maxlik_fixed_point(RecordSpan records, const SolverOptions& opts = {});

/// max_{j,+-} w_j |Tr{rho P_{+-a^j}} - (1 +- X_j)/2|: how far rho is from
/// reproducing every observed frequency.
double overcompleteness_defect(RecordSpan records, const DensityMatrix& rho);

/// Weight of each record, N_j / sum_k N_k.
std::vector<double> record_weights(RecordSpan records);

} // namespace sgtomo
