#include "sgtomo/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "likelihood_terms.hpp"

namespace sgtomo {

namespace {

constexpr double kShellCreep = 16.0 * std::numeric_limits<double>::epsilon();

void require_records(RecordSpan records) {
  if (records.empty()) {
    throw ValidationError("at least one measurement record is required");
  }
}

double checked_projection(const Vec3& a, const Vec3& r, std::size_t j) {
  const double u = a.dot(r);
  if (!(std::abs(u) < 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "record " << j << ": |a.r| = " << std::abs(u) << " makes a denominator vanish";
    throw SingularDenominator(os.str());
  }
  return u;
}

struct RK {
  double R;
  Vec3 K;
};

RK evaluate_rk(const detail::Terms& t, const Vec3& r) {
  RK out{0.0, Vec3::Zero()};
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double u = checked_projection(t.a[j], r, j);
    const double up = (1.0 + t.x[j]) / (1.0 + u);
    const double dn = (1.0 - t.x[j]) / (1.0 - u);
    out.R += 0.5 * t.w[j] * (up + dn);
    out.K += (0.5 * t.w[j] * (up - dn)) * t.a[j];
  }
  return out;
}

double increment(const detail::Terms& t, const Vec3& from, const Vec3& to) {
  const Vec3 delta = to - from;
  double sum = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double u = t.a[j].dot(from);
    const double du = t.a[j].dot(delta);
    if (t.n_plus[j] != 0.0) sum += t.n_plus[j] * std::log1p(du / (1.0 + u));
    if (t.n_minus[j] != 0.0) sum += t.n_minus[j] * std::log1p(-du / (1.0 - u));
  }
  return sum;
}

} // namespace

void SolverOptions::validate() const {
  if (!(tol_k > 0.0) || max_iterations <= 0 || !(damping_min > 0.0) || !(damping_min <= 1.0) ||
      !(ball_margin > 0.0) || !(ball_margin < 0.5)) {
    throw ValidationError("solver options out of range");
  }
}

std::vector<double> record_weights(RecordSpan records) {
  double total = 0.0;
  for (const auto& rec : records) total += static_cast<double>(rec.total());
  std::vector<double> w;
  w.reserve(records.size());
  for (const auto& rec : records) w.push_back(static_cast<double>(rec.total()) / total);
  return w;
}

LinearInversionResult linear_inversion(RecordSpan records) {
  if (records.size() != 3) {
    std::ostringstream os;
    os << "linear inversion needs exactly 3 records, got " << records.size();
    throw InvalidFrame(os.str());
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = i + 1; k < 3; ++k) {
      const double c = records[i].direction().vec().dot(records[k].direction().vec());
      if (std::abs(c) > 1e-9) {
        std::ostringstream os;
        os << "directions " << i << " and " << k << " are not orthogonal (a.b = " << c << ")";
        throw InvalidFrame(os.str());
      }
    }
  }
  Vec3 r = Vec3::Zero();
  for (const auto& rec : records) r += rec.x * rec.direction().vec();
  return {r, r.norm() > 1.0};
}

double log_likelihood(const Polarization& r, RecordSpan records) {
  return detail::log_likelihood_at(detail::flatten(records), r.vec());
}

double log_probability(const Polarization& r, RecordSpan records) {
  double total = 0.0;
  for (const auto& rec : records) total += static_cast<double>(rec.total());
  return log_likelihood(r, records) - total * std::numbers::ln2;
}

double log_likelihood_increment(const Vec3& from, const Vec3& to, RecordSpan records) {
  return increment(detail::flatten(records), from, to);
}

double compute_R(const Vec3& r, RecordSpan records) {
  require_records(records);
  return evaluate_rk(detail::flatten(records), r).R;
}

Vec3 compute_K(const Vec3& r, RecordSpan records) {
  require_records(records);
  return evaluate_rk(detail::flatten(records), r).K;
}

Vec3 gradient_residual(const Vec3& r, RecordSpan records) {
  Vec3 g = Vec3::Zero();
  for (std::size_t j = 0; j < records.size(); ++j) {
    const Vec3& a = records[j].direction().vec();
    const double u = checked_projection(a, r, j);
    g += ((records[j].x - u) / (1.0 - u * u)) * a;
  }
  return g;
}

ReconstructionResult maxlik_fixed_point(RecordSpan records, const SolverOptions& opts) {
  require_records(records);
  opts.validate();
  const detail::Terms terms = detail::flatten(records);

  const double max_radius = 1.0 - opts.ball_margin;
  const double boundary_radius = 1.0 - 2.0 * opts.ball_margin;

  ReconstructionResult res;
  Vec3 r = Vec3::Zero();
  double ll = detail::log_likelihood_at(terms, r);
  if (opts.keep_trace) {
    res.trace.iterates.push_back(r);
    res.trace.log_likelihood.push_back(ll);
  }

  RK rk = evaluate_rk(terms, r);
  for (;;) {
    const double radius = r.norm();
    if (radius < boundary_radius) {
      res.k_residual = rk.K.norm();
      if (res.k_residual <= opts.tol_k) {
        res.converged = true;
        break;
      }
    } else {
      const Vec3 dir = r / radius;
      const double radial = rk.K.dot(dir);
      res.k_residual = (rk.K - radial * dir).norm();
      if (res.k_residual <= opts.tol_k && radial >= -opts.tol_k) {
        res.converged = true;
        res.boundary = true;
        break;
      }
    }
    if (res.iterations >= opts.max_iterations) break;

    // Fixed-point map r -> R r + K, taken as a damped step.
    const Vec3 step = rk.R * r + rk.K - r;
    // Overshooting trials are pulled back onto a shell a few ulps outside the
    // current radius, so rounding of the projection cannot undo a tangential gain.
    const double shell =
        std::min(max_radius, std::max(boundary_radius, radius) + kShellCreep);
    bool accepted = false;
    for (double lambda = 1.0; lambda >= opts.damping_min; lambda *= 0.5) {
      Vec3 trial = r + lambda * step;
      const double n = trial.norm();
      if (n > shell) trial *= shell / n;
      if (trial == r) break;
      const double gain = increment(terms, r, trial);
      if (gain >= 0.0) {
        r = trial;
        ll = detail::log_likelihood_at(terms, r);
        if (opts.keep_trace) {
          res.trace.iterates.push_back(r);
          res.trace.log_likelihood.push_back(ll);
          res.trace.increments.push_back(gain);
          res.trace.step_sizes.push_back(lambda);
        }
        accepted = true;
        break;
      }
    }
    if (!accepted) break; // stalled: no ascent step above damping_min
    ++res.iterations;
    rk = evaluate_rk(terms, r);
  }

  res.r_value = rk.R;
  res.r_est = Polarization(r);
  res.log_likelihood = ll;
  if (res.boundary) {
    // Pure-state solution: report the point on the sphere itself.
    const Polarization pure(r / r.norm());
    const double ll_pure = detail::log_likelihood_at(terms, pure.vec());
    if (ll_pure >= ll) {
      res.r_est = pure;
      res.log_likelihood = ll_pure;
    }
  }
  return res;
}

double overcompleteness_defect(RecordSpan records, const DensityMatrix& rho) {
  const std::vector<double> w = record_weights(records);
  double worst = 0.0;
  for (std::size_t j = 0; j < records.size(); ++j) {
    for (Sign s : {Sign::plus, Sign::minus}) {
      const Mat2 proj = projector_from_direction(records[j].direction(), s).mat();
      const double predicted = (rho.mat() * proj).trace().real();
      const double observed = 0.5 * (1.0 + to_double(s) * records[j].x);
      worst = std::max(worst, w[j] * std::abs(predicted - observed));
    }
  }
  return worst;
}

} // namespace sgtomo
