#include "sgtomo/grid_oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <omp.h>

#include "likelihood_terms.hpp"

namespace sgtomo {

namespace {

struct Candidate {
  Vec3 r;
  double ll = -std::numeric_limits<double>::infinity();
  double norm = std::numeric_limits<double>::infinity();
  bool valid = false;
};

bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.ll != b.ll) return a.ll > b.ll;
  if (a.norm != b.norm) return a.norm < b.norm;
  for (int i = 0; i < 3; ++i) {
    if (a.r[i] != b.r[i]) return a.r[i] < b.r[i];
  }
  return false;
}

struct Lattice {
  long half; // indices run over [-half, half]
  double h;

  long side() const { return 2 * half + 1; }
  std::size_t count() const {
    const auto s = static_cast<std::size_t>(side());
    return s * s * s;
  }
  Vec3 point(long flat) const {
    const long s = side();
    const long i = flat / (s * s) - half;
    const long j = (flat / s) % s - half;
    const long k = flat % s - half;
    Vec3 p(static_cast<double>(i) * h, static_cast<double>(j) * h, static_cast<double>(k) * h);
    const double n = p.norm();
    if (n > 1.0) p /= n;
    return p;
  }
};

Lattice make_lattice(double resolution) {
  if (!(resolution > 0.0 && resolution <= 0.5)) {
    std::ostringstream os;
    os << "grid resolution must lie in (0, 0.5], got " << resolution;
    throw ValidationError(os.str());
  }
  return Lattice{static_cast<long>(std::ceil(1.0 / resolution - 1e-9)), resolution};
}

Candidate evaluate(const detail::Terms& t, const Vec3& p) {
  Candidate c;
  c.r = p;
  c.ll = detail::log_likelihood_at(t, p);
  c.norm = p.norm();
  c.valid = true;
  return c;
}

} // namespace

GridOracleResult grid_oracle_serial(RecordSpan records, double resolution) {
  const Lattice lat = make_lattice(resolution);
  const detail::Terms terms = detail::flatten(records);
  const long n = static_cast<long>(lat.count());

  Candidate best;
  for (long f = 0; f < n; ++f) {
    const Candidate c = evaluate(terms, lat.point(f));
    if (better(c, best)) best = c;
  }
  return {best.r, best.ll, lat.count()};
}

GridOracleResult grid_oracle(RecordSpan records, double resolution) {
  const Lattice lat = make_lattice(resolution);
  const detail::Terms terms = detail::flatten(records);
  const long n = static_cast<long>(lat.count());

  Candidate best;
#pragma omp parallel
  {
    Candidate local;
#pragma omp for schedule(static)
    for (long f = 0; f < n; ++f) {
      const Candidate c = evaluate(terms, lat.point(f));
      if (better(c, local)) local = c;
    }
#pragma omp critical(sgtomo_grid_reduce)
    {
      if (better(local, best)) best = local;
    }
  }
  return {best.r, best.ll, lat.count()};
}

} // namespace sgtomo
