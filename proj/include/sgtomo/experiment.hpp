#pragma once

// Repeated simulate-then-reconstruct experiments.
//
// Repetition k draws its campaign from derive_stream(seed, k), so the report
// is a pure function of the config no matter how repetitions are scheduled.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sgtomo/estimator.hpp"
#include "sgtomo/rng.hpp"
#include "sgtomo/simulator.hpp"

namespace sgtomo {

/// Five analyzers at polar angle 60 degrees from +z, azimuths 0, 72, 144,
/// 216 and 288 degrees.
std::vector<Direction> default_directions();

struct ExperimentConfig {
  std::vector<Direction> directions = default_directions();
  std::int64_t n_particles = 20;
  Polarization r_true{0.0, 0.0, 1.0};
  int repetitions = 10;
  RngSeed seed{};
  SolverOptions solver{};
  std::optional<double> grid_check; // oracle resolution, if requested

  void validate() const;
  std::vector<MeasurementSetting> settings() const;
};

/// True, counted and reconstructed probability of one outcome of one setting.
struct BarTriple {
  std::size_t setting_index;
  Sign sign;
  double p_true;
  double p_empirical;
  double p_reconstructed;
};

/// (plus, minus) bars. Each minus bar is the complement of its plus bar, so
/// the pair sums to exactly 1 for every bar type.
std::pair<BarTriple, BarTriple> bar_triples(const Polarization& r_true,
                                            const MeasurementRecord& record,
                                            const Polarization& r_est,
                                            std::size_t setting_index = 0);

struct OracleCheck {
  double resolution;
  Vec3 r;
  double log_likelihood;
  double distance; // |r_oracle - r_est|
};

struct RepetitionResult {
  std::vector<MeasurementRecord> records;
  ReconstructionResult reconstruction;
  std::vector<BarTriple> bars; // 2 per setting, plus first
  std::optional<OracleCheck> oracle;
};

struct ExperimentSummary {
  Vec3 mean_r_est = Vec3::Zero();
  double mean_abs_error = 0.0; // mean |r_est - r_true|
  double rms_error = 0.0;
  double fraction_boundary = 0.0;
  double fraction_converged = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RepetitionResult> per_repetition;
  ExperimentSummary summary;
};

/// Repetitions run in parallel with OpenMP.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Single-threaded reference.
ExperimentReport run_experiment_serial(const ExperimentConfig& config);

struct RepetitionStatistics {
  std::size_t samples = 0;
  std::vector<double> mean_x;                // per setting
  std::vector<std::optional<double>> std_x;  // per setting; absent for one sample
  double mean_error = 0.0;
  double rms_error = 0.0;
  double fraction_boundary = 0.0;
};

/// Pools every repetition of every report. All reports must share the same
/// number of settings.
RepetitionStatistics repetition_statistics(std::span<const ExperimentReport> reports);

} // namespace sgtomo
