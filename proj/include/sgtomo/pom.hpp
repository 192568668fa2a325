#pragma once

// Renormalized Stern-Gerlach projectors at an extremal state.
//
// For each setting j and outcome s, the element is
//
//   E_{j,s} = w_j (1 + s X_j) / (2 <s a^j| rho_e |s a^j>) |s a^j><s a^j|
//
// with w_j = 1/M for equal particle budgets. At a maximum-likelihood state
// the elements sum to the identity (on the support of rho_e when rho_e is
// pure), and Tr{rho_e E_{j,s}} = w_j (1 + s X_j) / 2 holds identically.

#include <vector>

#include "sgtomo/estimator.hpp"

namespace sgtomo {

inline constexpr double kPomDenominatorFloor = 1e-12;
inline constexpr double kRankEigenvalueFloor = 1e-9;

struct RenormalizedElement {
  Mat2 op;
  std::size_t setting_index;
  Sign sign;
};

/// Throws SingularRenormalization when a Born probability is <= 1e-12 under a
/// non-zero count. With a zero count the element is the zero matrix.
std::vector<RenormalizedElement> build_renormalized_pom(RecordSpan records,
                                                        const DensityMatrix& rho_e);

/// 1 if the smaller eigenvalue of rho is <= 1e-9, else 2.
int state_rank(const DensityMatrix& rho);

/// Rank 2: max |(sum E - 1)_{ik}|. Rank 1 (rho = |e><e|): |<e| sum E |e> - 1|.
double closure_defect(const std::vector<RenormalizedElement>& pom, const DensityMatrix& rho_e);

/// max_{j,s} |Tr{rho_e E_{j,s}} - w_j (1 + s X_j) / 2|.
double expectation_identity_defect(const DensityMatrix& rho_e,
                                   const std::vector<RenormalizedElement>& pom,
                                   RecordSpan records);

struct DiagnosticReport {
  double closure_defect;
  double expectation_defect;
  int rank;
  std::size_t elements;
};

DiagnosticReport diagnose(RecordSpan records, const DensityMatrix& rho_e);

} // namespace sgtomo
