#pragma once

// Spin-1/2 algebra on the Bloch ball.
//
// Pauli convention: sigma_1 = x, sigma_2 = y, sigma_3 = z, with sigma_3
// diagonal, i.e. sigma_3 = diag(1, -1) and sigma_2 = [[0, -i], [i, 0]].
// A state with polarization r has density matrix (1 + r_i sigma_i) / 2.

#include <array>
#include <complex>

#include <Eigen/Core>

#include "sgtomo/errors.hpp"

namespace sgtomo {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2cd;
using cplx = std::complex<double>;

inline constexpr double kBallEps = 1e-12;      // tolerance on |r| <= 1
inline constexpr double kMatrixEps = 1e-12;    // Hermiticity / trace / eigenvalue tolerance
inline constexpr double kProbabilityEps = 1e-12;
inline constexpr double kMinDirectionNorm = 1e-9;

enum class Sign : int { plus = 1, minus = -1 };

constexpr double to_double(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }
constexpr Sign opposite(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }

/// Pauli matrix sigma_k for k in {0, 1, 2} (x, y, z).
const Mat2& pauli(int k);

/// Unit analyzer direction. Construction normalizes the input and rejects
/// vectors shorter than 1e-9 or with non-finite components.
class Direction {
public:
  explicit Direction(const Vec3& v);
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  const Vec3& vec() const { return a_; }
  double operator[](int i) const { return a_[i]; }
  double dot(const Vec3& v) const { return a_.dot(v); }
  Direction flipped() const;

  bool operator==(const Direction& o) const { return a_ == o.a_; }

private:
  struct Trusted {};
  Direction(const Vec3& unit, Trusted) : a_(unit) {}

  Vec3 a_;
};

/// Bloch (polarization) vector with |r| <= 1. Vectors that overshoot the
/// unit sphere by at most kBallEps are scaled back onto it.
class Polarization {
public:
  Polarization() : r_(Vec3::Zero()) {}
  explicit Polarization(const Vec3& r);
  Polarization(double x, double y, double z) : Polarization(Vec3(x, y, z)) {}

  const Vec3& vec() const { return r_; }
  double operator[](int i) const { return r_[i]; }
  double norm() const { return r_.norm(); }

  bool operator==(const Polarization& o) const { return r_ == o.r_; }

private:
  Vec3 r_;
};

/// 2x2 Hermitian, unit-trace, positive-semidefinite matrix.
class DensityMatrix {
public:
  explicit DensityMatrix(const Mat2& m);

  const Mat2& mat() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  /// Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const;

private:
  struct Trusted {};
  DensityMatrix(const Mat2& m, Trusted) : m_(m) {}
  friend DensityMatrix density_from_polarization(const Polarization& r);
  friend DensityMatrix projector_from_direction(const Direction& a, Sign sign);

  Mat2 m_;
};

/// Eigenvalues (ascending) of a 2x2 Hermitian matrix, closed form.
std::array<double, 2> hermitian_eigenvalues(const Mat2& m);

/// (1 + sign a_i sigma_i) / 2, the rank-1 projector onto |sign a>.
DensityMatrix projector_from_direction(const Direction& a, Sign sign);

/// |<a|b>|^2 = (1 + a.b) / 2.
double overlap_squared(const Direction& a, const Direction& b);

DensityMatrix density_from_polarization(const Polarization& r);

/// r_i = Tr{rho sigma_i}.
Polarization polarization_from_density(const DensityMatrix& rho);

/// Born probability of outcome `sign` along a: (1 + sign r.a) / 2.
/// The minus outcome is returned as 1 - p(+), so p(+) + p(-) == 1 exactly.
double born_probability(const Polarization& r, const Direction& a, Sign sign);

/// Clamp a value that should be a probability. Excursions beyond
/// kProbabilityEps outside [0, 1] raise InvalidState.
double clamp_probability(double p);

} // namespace sgtomo
