#pragma once

#include <cstdint>
#include <vector>

#include "sgtomo/algebra.hpp"
#include "sgtomo/rng.hpp"

namespace sgtomo {

struct MeasurementSetting {
  Direction a;
  std::int64_t n_particles;

  MeasurementSetting(Direction dir, std::int64_t n);
};

/// Outcome of one Stern-Gerlach setting: n_plus spin-up and n_minus
/// spin-down particles, and the signed frequency x = (n_plus - n_minus) / N.
struct MeasurementRecord {
  MeasurementSetting setting;
  std::int64_t n_plus;
  std::int64_t n_minus;
  double x;

  static MeasurementRecord from_counts(const MeasurementSetting& setting, std::int64_t n_plus,
                                       std::int64_t n_minus);

  const Direction& direction() const { return setting.a; }
  std::int64_t total() const { return setting.n_particles; }
  std::int64_t count(Sign s) const { return s == Sign::plus ? n_plus : n_minus; }
};

MeasurementRecord simulate_setting(const Polarization& r_true, const MeasurementSetting& setting,
                                   RngSeed seed);

/// Record j is drawn from stream derive_stream(seed, j), so the campaign does
/// not depend on the order in which settings are evaluated.
std::vector<MeasurementRecord> simulate_campaign(const Polarization& r_true,
                                                 const std::vector<MeasurementSetting>& settings,
                                                 RngSeed seed);

/// Predicted standard deviation of n_plus (and n_minus): sqrt(N (1 - (r.a)^2)) / 2.
double sampling_rms(const Polarization& r, const Direction& a, std::int64_t n_particles);

} // namespace sgtomo
