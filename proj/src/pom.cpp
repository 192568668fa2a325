#include "sgtomo/pom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgtomo {

namespace {

double born_from_matrix(const DensityMatrix& rho, const Mat2& proj) {
  return (rho.mat() * proj).trace().real();
}

// Eigenvector of the larger eigenvalue of a 2x2 Hermitian matrix.
Eigen::Vector2cd leading_eigenvector(const Mat2& m) {
  const auto ev = hermitian_eigenvalues(m);
  const double lambda = ev[1];
  // Rows of (m - lambda) are orthogonal to the eigenvector; use the larger one.
  const cplx a = m(0, 0) - lambda;
  const cplx b = m(0, 1);
  const cplx c = m(1, 0);
  const cplx d = m(1, 1) - lambda;
  Eigen::Vector2cd v;
  if (std::abs(a) + std::abs(b) >= std::abs(c) + std::abs(d)) {
    v << b, -a;
  } else {
    v << d, -c;
  }
  const double n = v.norm();
  if (n == 0.0) {
    v << 1.0, 0.0; // degenerate: any vector is an eigenvector
    return v;
  }
  return v / n;
}

} // namespace

std::vector<RenormalizedElement> build_renormalized_pom(RecordSpan records,
                                                        const DensityMatrix& rho_e) {
  const std::vector<double> w = record_weights(records);
  std::vector<RenormalizedElement> pom;
  pom.reserve(2 * records.size());
  for (std::size_t j = 0; j < records.size(); ++j) {
    const auto& rec = records[j];
    for (Sign s : {Sign::plus, Sign::minus}) {
      const Mat2 proj = projector_from_direction(rec.direction(), s).mat();
      const double denom = born_from_matrix(rho_e, proj);
      if (denom <= kPomDenominatorFloor) {
        if (rec.count(s) != 0) {
          std::ostringstream os;
          os << "record " << j << (s == Sign::plus ? " (+)" : " (-)")
             << ": zero Born probability under a non-zero count";
          throw SingularRenormalization(os.str());
        }
        pom.push_back({Mat2::Zero(), j, s});
        continue;
      }
      const double numer = 1.0 + to_double(s) * rec.x;
      pom.push_back({(w[j] * numer / (2.0 * denom)) * proj, j, s});
    }
  }
  return pom;
}

int state_rank(const DensityMatrix& rho) {
  return rho.eigenvalues()[0] <= kRankEigenvalueFloor ? 1 : 2;
}

double closure_defect(const std::vector<RenormalizedElement>& pom, const DensityMatrix& rho_e) {
  Mat2 sum = Mat2::Zero();
  for (const auto& e : pom) sum += e.op;
  if (state_rank(rho_e) == 2) {
    return (sum - Mat2::Identity()).cwiseAbs().maxCoeff();
  }
  const Eigen::Vector2cd e = leading_eigenvector(rho_e.mat());
  const cplx ray = e.dot(sum * e); // Eigen's dot conjugates the left operand
  return std::abs(ray - cplx(1.0, 0.0));
}

double expectation_identity_defect(const DensityMatrix& rho_e,
                                   const std::vector<RenormalizedElement>& pom,
                                   RecordSpan records) {
  const std::vector<double> w = record_weights(records);
  double worst = 0.0;
  for (const auto& e : pom) {
    const auto& rec = records[e.setting_index];
    const double target = 0.5 * w[e.setting_index] * (1.0 + to_double(e.sign) * rec.x);
    const double value = (rho_e.mat() * e.op).trace().real();
    worst = std::max(worst, std::abs(value - target));
  }
  return worst;
}

DiagnosticReport diagnose(RecordSpan records, const DensityMatrix& rho_e) {
  if (records.empty()) {
    throw ValidationError("at least one measurement record is required");
  }
  const auto pom = build_renormalized_pom(records, rho_e);
  return {closure_defect(pom, rho_e), expectation_identity_defect(rho_e, pom, records),
          state_rank(rho_e), pom.size()};
}

} // namespace sgtomo
