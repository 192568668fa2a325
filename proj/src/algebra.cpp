#include "sgtomo/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sgtomo {

namespace {

const std::array<Mat2, 3>& pauli_table() {
  static const std::array<Mat2, 3> table = [] {
    const cplx i(0.0, 1.0);
    std::array<Mat2, 3> t;
    t[0] << 0.0, 1.0, 1.0, 0.0;
    t[1] << 0.0, -i, i, 0.0;
    t[2] << 1.0, 0.0, 0.0, -1.0;
    return t;
  }();
  return table;
}

bool all_finite(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

// (1 + s_i sigma_i) / 2 for an arbitrary real 3-vector s.
Mat2 half_identity_plus(const Vec3& s) {
  Mat2 m;
  m(0, 0) = cplx(0.5 * (1.0 + s[2]), 0.0);
  m(1, 1) = cplx(0.5 * (1.0 - s[2]), 0.0);
  m(0, 1) = cplx(0.5 * s[0], -0.5 * s[1]);
  m(1, 0) = cplx(0.5 * s[0], 0.5 * s[1]);
  return m;
}

} // namespace

const Mat2& pauli(int k) { return pauli_table().at(static_cast<std::size_t>(k)); }

Direction::Direction(const Vec3& v) {
  if (!all_finite(v)) {
    throw InvalidDirection("direction has non-finite components");
  }
  const double n = v.norm();
  if (n < kMinDirectionNorm) {
    std::ostringstream os;
    os << "direction norm " << n << " is below " << kMinDirectionNorm;
    throw InvalidDirection(os.str());
  }
  // Already unit to working precision: keep the bits so that reloading a
  // stored direction reproduces it exactly.
  a_ = std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? v : Vec3(v / n);
}

Direction Direction::flipped() const { return Direction(-a_, Trusted{}); }

Polarization::Polarization(const Vec3& r) : r_(r) {
  if (!all_finite(r)) {
    throw OutOfBall("polarization has non-finite components");
  }
  const double n = r.norm();
  if (n > 1.0 + kBallEps) {
    std::ostringstream os;
    os.precision(17);
    os << "polarization norm " << n << " exceeds 1";
    throw OutOfBall(os.str());
  }
  if (n > 1.0) {
    r_ /= n;
  }
}

std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double mean = 0.5 * (a + d);
  const double half_gap = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
  return {mean - half_gap, mean + half_gap};
}

DensityMatrix::DensityMatrix(const Mat2& m) : m_(m) {
  if (!m.allFinite()) {
    throw InvalidState("density matrix has non-finite entries");
  }
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kMatrixEps) {
    throw InvalidState("density matrix is not Hermitian");
  }
  if (std::abs(m.trace() - cplx(1.0, 0.0)) > kMatrixEps) {
    throw InvalidState("density matrix trace differs from 1");
  }
  // Symmetrize so downstream formulas see an exactly Hermitian matrix.
  m_ = 0.5 * (m + m.adjoint());
  if (hermitian_eigenvalues(m_)[0] < -kMatrixEps) {
    throw InvalidState("density matrix has a negative eigenvalue");
  }
}

std::array<double, 2> DensityMatrix::eigenvalues() const { return hermitian_eigenvalues(m_); }

DensityMatrix projector_from_direction(const Direction& a, Sign sign) {
  return DensityMatrix(half_identity_plus(to_double(sign) * a.vec()), DensityMatrix::Trusted{});
}

double overlap_squared(const Direction& a, const Direction& b) {
  return clamp_probability(0.5 * (1.0 + a.vec().dot(b.vec())));
}

DensityMatrix density_from_polarization(const Polarization& r) {
  return DensityMatrix(half_identity_plus(r.vec()), DensityMatrix::Trusted{});
}

Polarization polarization_from_density(const DensityMatrix& rho) {
  const Mat2& m = rho.mat();
  // Tr{rho sigma_x} = 2 Re rho_01, Tr{rho sigma_y} = -2 Im rho_01, Tr{rho sigma_z} = rho_00 - rho_11.
  return Polarization(Vec3(2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(),
                           m(0, 0).real() - m(1, 1).real()));
}

double clamp_probability(double p) {
  if (!(p >= -kProbabilityEps && p <= 1.0 + kProbabilityEps)) {
    std::ostringstream os;
    os.precision(17);
    os << "probability " << p << " outside [0, 1]";
    throw InvalidState(os.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

double born_probability(const Polarization& r, const Direction& a, Sign sign) {
  const double p_plus = clamp_probability(0.5 * (1.0 + r.vec().dot(a.vec())));
  return sign == Sign::plus ? p_plus : 1.0 - p_plus;
}

} // namespace sgtomo
