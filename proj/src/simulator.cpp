#include "sgtomo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgtomo {

MeasurementSetting::MeasurementSetting(Direction dir, std::int64_t n) : a(dir), n_particles(n) {
  if (n < 1) {
    std::ostringstream os;
    os << "particle count must be >= 1, got " << n;
    throw ValidationError(os.str());
  }
}

MeasurementRecord MeasurementRecord::from_counts(const MeasurementSetting& setting,
                                                 std::int64_t n_plus, std::int64_t n_minus) {
  if (n_plus < 0 || n_minus < 0 || n_plus + n_minus != setting.n_particles) {
    std::ostringstream os;
    os << "counts (" << n_plus << ", " << n_minus << ") do not add up to N = "
       << setting.n_particles;
    throw ValidationError(os.str());
  }
  const double x = static_cast<double>(n_plus - n_minus) / static_cast<double>(setting.n_particles);
  return MeasurementRecord{setting, n_plus, n_minus, x};
}

MeasurementRecord simulate_setting(const Polarization& r_true, const MeasurementSetting& setting,
                                   RngSeed seed) {
  CounterRng rng(seed);
  const double p = born_probability(r_true, setting.a, Sign::plus);
  const std::int64_t n_plus = binomial_inverse_cdf(setting.n_particles, p, rng.uniform());
  return MeasurementRecord::from_counts(setting, n_plus, setting.n_particles - n_plus);
}

std::vector<MeasurementRecord> simulate_campaign(const Polarization& r_true,
                                                 const std::vector<MeasurementSetting>& settings,
                                                 RngSeed seed) {
  if (settings.empty()) {
    throw ValidationError("campaign needs at least one setting");
  }
  std::vector<MeasurementRecord> out;
  out.reserve(settings.size());
  for (std::size_t j = 0; j < settings.size(); ++j) {
    out.push_back(simulate_setting(r_true, settings[j], derive_stream(seed, j)));
  }
  return out;
}

double sampling_rms(const Polarization& r, const Direction& a, std::int64_t n_particles) {
  if (n_particles < 1) {
    throw ValidationError("particle count must be >= 1");
  }
  const double u = std::clamp(r.vec().dot(a.vec()), -1.0, 1.0);
  return 0.5 * std::sqrt(static_cast<double>(n_particles) * (1.0 - u * u));
}

} // namespace sgtomo
