#include "sgtomo/experiment.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "sgtomo/grid_oracle.hpp"

namespace sgtomo {

std::vector<Direction> default_directions() {
  const double polar = std::numbers::pi / 3.0;
  std::vector<Direction> dirs;
  dirs.reserve(5);
  for (int k = 0; k < 5; ++k) {
    const double azimuth = 2.0 * std::numbers::pi * k / 5.0;
    dirs.emplace_back(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
                      std::cos(polar));
  }
  return dirs;
}

void ExperimentConfig::validate() const {
  if (directions.empty()) throw ValidationError("experiment needs at least one direction");
  if (n_particles < 1) throw ValidationError("n_particles must be >= 1");
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (grid_check && !(*grid_check > 0.0 && *grid_check <= 0.5)) {
    throw ValidationError("grid_check resolution must lie in (0, 0.5]");
  }
  solver.validate();
}

std::vector<MeasurementSetting> ExperimentConfig::settings() const {
  std::vector<MeasurementSetting> out;
  out.reserve(directions.size());
  for (const auto& d : directions) out.emplace_back(d, n_particles);
  return out;
}

std::pair<BarTriple, BarTriple> bar_triples(const Polarization& r_true,
                                            const MeasurementRecord& record,
                                            const Polarization& r_est, std::size_t setting_index) {
  BarTriple plus{setting_index, Sign::plus,
                 born_probability(r_true, record.direction(), Sign::plus),
                 static_cast<double>(record.n_plus) / static_cast<double>(record.total()),
                 born_probability(r_est, record.direction(), Sign::plus)};
  BarTriple minus{setting_index, Sign::minus, 1.0 - plus.p_true, 1.0 - plus.p_empirical,
                  1.0 - plus.p_reconstructed};
  return {plus, minus};
}

namespace {

RepetitionResult run_repetition(const ExperimentConfig& config,
                                const std::vector<MeasurementSetting>& settings, int k) {
  RepetitionResult rep;
  rep.records = simulate_campaign(config.r_true, settings,
                                  derive_stream(config.seed, static_cast<std::uint64_t>(k)));
  rep.reconstruction = maxlik_fixed_point(rep.records, config.solver);
  rep.bars.reserve(2 * rep.records.size());
  for (std::size_t j = 0; j < rep.records.size(); ++j) {
    auto [p, m] = bar_triples(config.r_true, rep.records[j], rep.reconstruction.r_est, j);
    rep.bars.push_back(p);
    rep.bars.push_back(m);
  }
  if (config.grid_check) {
    // Already inside the repetition-level parallel region.
    const auto g = grid_oracle_serial(rep.records, *config.grid_check);
    rep.oracle = OracleCheck{*config.grid_check, g.r, g.log_likelihood,
                             (g.r - rep.reconstruction.r_est.vec()).norm()};
  }
  return rep;
}

ExperimentSummary summarize(const ExperimentConfig& config,
                            const std::vector<RepetitionResult>& reps) {
  ExperimentSummary s;
  double sq = 0.0;
  for (const auto& rep : reps) {
    const auto& rec = rep.reconstruction;
    const double err = (rec.r_est.vec() - config.r_true.vec()).norm();
    s.mean_r_est += rec.r_est.vec();
    s.mean_abs_error += err;
    sq += err * err;
    s.fraction_boundary += rec.boundary ? 1.0 : 0.0;
    s.fraction_converged += rec.converged ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(reps.size());
  s.mean_r_est /= n;
  s.mean_abs_error /= n;
  s.rms_error = std::sqrt(sq / n);
  s.fraction_boundary /= n;
  s.fraction_converged /= n;
  return s;
}

} // namespace

ExperimentReport run_experiment_serial(const ExperimentConfig& config) {
  config.validate();
  const auto settings = config.settings();
  ExperimentReport report{config, {}, {}};
  report.per_repetition.reserve(static_cast<std::size_t>(config.repetitions));
  for (int k = 0; k < config.repetitions; ++k) {
    report.per_repetition.push_back(run_repetition(config, settings, k));
  }
  report.summary = summarize(config, report.per_repetition);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto settings = config.settings();
  const int n = config.repetitions;
  std::vector<RepetitionResult> reps(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      reps[static_cast<std::size_t>(k)] = run_repetition(config, settings, k);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report{config, std::move(reps), {}};
  report.summary = summarize(config, report.per_repetition);
  return report;
}

RepetitionStatistics repetition_statistics(std::span<const ExperimentReport> reports) {
  if (reports.empty()) throw ValidationError("repetition_statistics needs at least one report");
  const std::size_t m = reports.front().config.directions.size();

  RepetitionStatistics st;
  std::vector<double> sum(m, 0.0);
  double sq_err = 0.0;
  for (const auto& rep : reports) {
    if (rep.config.directions.size() != m) {
      throw ValidationError("reports disagree on the number of settings");
    }
    for (const auto& r : rep.per_repetition) {
      for (std::size_t j = 0; j < m; ++j) sum[j] += r.records[j].x;
      const double err = (r.reconstruction.r_est.vec() - rep.config.r_true.vec()).norm();
      st.mean_error += err;
      sq_err += err * err;
      st.fraction_boundary += r.reconstruction.boundary ? 1.0 : 0.0;
      ++st.samples;
    }
  }
  const double n = static_cast<double>(st.samples);
  st.mean_x.resize(m);
  for (std::size_t j = 0; j < m; ++j) st.mean_x[j] = sum[j] / n;
  st.mean_error /= n;
  st.rms_error = std::sqrt(sq_err / n);
  st.fraction_boundary /= n;

  st.std_x.assign(m, std::nullopt);
  if (st.samples > 1) {
    std::vector<double> ss(m, 0.0);
    for (const auto& rep : reports) {
      for (const auto& r : rep.per_repetition) {
        for (std::size_t j = 0; j < m; ++j) {
          const double d = r.records[j].x - st.mean_x[j];
          ss[j] += d * d;
        }
      }
    }
    for (std::size_t j = 0; j < m; ++j) st.std_x[j] = std::sqrt(ss[j] / (n - 1.0));
  }
  return st;
}

} // namespace sgtomo
