// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "sgtomo/experiment.hpp"
#include "sgtomo/grid_oracle.hpp"

using namespace sgtomo;

namespace {

std::vector<MeasurementRecord> north_pole_records() {
  std::vector<MeasurementSetting> settings;
  for (const auto& d : default_directions()) settings.emplace_back(d, 20);
  return simulate_campaign(Polarization(0, 0, 1), settings, RngSeed{1});
}

ExperimentConfig bench_config() {
  ExperimentConfig cfg;
  cfg.repetitions = 200;
  cfg.seed = RngSeed{2};
  return cfg;
}

void BM_GridOracleSerial(benchmark::State& state) {
  const auto recs = north_pole_records();
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_oracle_serial(recs, h));
}

void BM_GridOracleParallel(benchmark::State& state) {
  const auto recs = north_pole_records();
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_oracle(recs, h));
}

void BM_ExperimentSerial(benchmark::State& state) {
  const auto cfg = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment_serial(cfg));
}

void BM_ExperimentParallel(benchmark::State& state) {
  const auto cfg = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}

} // namespace

BENCHMARK(BM_GridOracleSerial)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridOracleParallel)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
