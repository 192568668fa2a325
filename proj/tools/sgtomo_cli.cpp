// sgtomo: simulate Stern-Gerlach campaigns and reconstruct spin-1/2 states.
//
// Exit codes:
//   0  success
//   1  invalid config, malformed records or state, bad arguments
//   2  I/O failure
//   3  reconstruction did not converge (only with --strict)

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "sgtomo/estimator.hpp"
#include "sgtomo/experiment.hpp"
#include "sgtomo/grid_oracle.hpp"
#include "sgtomo/io.hpp"
#include "sgtomo/pom.hpp"

namespace fs = std::filesystem;
using namespace sgtomo;

namespace {

enum ExitCode : int { kOk = 0, kInvalid = 1, kIo = 2, kNotConverged = 3 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  int threads = 0;
  bool strict = false;
};

CliConfig load_config(const Common& c) {
  if (c.config.empty()) throw FormatError("--config: a config file is required");
  CliConfig cfg = config_from_json(read_json_file(c.config));
  if (c.seed) cfg.experiment.seed = RngSeed{*c.seed};
  return cfg;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

int cmd_simulate(const Common& c) {
  const CliConfig cfg = load_config(c);
  cfg.experiment.validate();
  const auto records = simulate_campaign(cfg.experiment.r_true, cfg.experiment.settings(),
                                         derive_stream(cfg.experiment.seed, 0));
  std::string out = c.out;
  if (out.empty() && cfg.output.records) out = cfg.output.records->string();
  const bool csv = fs::path(out).extension() == ".csv";
  emit(out, csv ? records_to_csv(records) : records_to_json(records).dump(2) + "\n");
  return kOk;
}

struct ReconstructArgs {
  std::string records;
  std::optional<double> oracle;
  bool linear = false;
};

int cmd_reconstruct(const Common& c, const ReconstructArgs& a) {
  SolverOptions opts;
  if (!c.config.empty()) opts = load_config(c).experiment.solver;
  const auto records = read_records_file(a.records);
  if (a.oracle && !(*a.oracle > 0.0 && *a.oracle <= 0.5)) {
    throw FormatError("--oracle: resolution must lie in (0, 0.5]");
  }
  std::optional<LinearInversionResult> lin;
  if (a.linear) lin = linear_inversion(records);

  const ReconstructionResult res = maxlik_fixed_point(records, opts);
  json j = result_to_json(res);
  if (lin) {
    j["linear"] = {{"r", vec_to_json(lin->r)},
                   {"norm", lin->r.norm()},
                   {"out_of_ball", lin->out_of_ball}};
  }
  if (a.oracle) {
    const auto g = grid_oracle(records, *a.oracle);
    const double delta = (g.r - res.r_est.vec()).norm();
    const double bound = *a.oracle * std::sqrt(3.0);
    j["oracle"] = {{"resolution", *a.oracle},
                   {"r", vec_to_json(g.r)},
                   {"log_likelihood", g.log_likelihood},
                   {"delta_r", delta},
                   {"bound", bound},
                   {"within_bound", delta <= bound},
                   {"solver_not_worse", res.log_likelihood >= g.log_likelihood - 1e-9}};
  }
  emit(c.out, j.dump(2) + "\n");
  if (c.strict && !res.converged) {
    std::cerr << "sgtomo: reconstruction did not converge after " << res.iterations
              << " iterations\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_experiment(const Common& c) {
  const CliConfig cfg = load_config(c);
  fs::path dir = c.out;
  if (dir.empty() && cfg.output.dir) dir = *cfg.output.dir;
  if (dir.empty()) throw FormatError("--out: an output directory is required");

  const ExperimentReport rep = run_experiment(cfg.experiment);
  const std::string report = report_to_json(rep).dump(2) + "\n";
  const std::string bars = bars_csv(rep);
  const std::string states = states_csv(rep);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / "report.json", report);
  write_file_atomic(dir / "bars.csv", bars);
  write_file_atomic(dir / "states.csv", states);
  if (c.strict && rep.summary.fraction_converged < 1.0) return kNotConverged;
  return kOk;
}

struct DiagnoseArgs {
  std::string records;
  std::string state;
};

int cmd_diagnose(const Common& c, const DiagnoseArgs& a) {
  const auto records = read_records_file(a.records);
  const Polarization r = state_from_json(read_json_file(a.state));
  const DiagnosticReport rep = diagnose(records, density_from_polarization(r));
  emit(c.out, diagnostics_to_json(rep).dump(2) + "\n");
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool with_config) {
  sub->add_option("--seed", c.seed, "Override the RNG seed");
  if (with_config) sub->add_option("--config", c.config, "JSON config file");
  sub->add_option("--out", c.out, "Output file or directory ('-' for stdout)");
  sub->add_option("--threads", c.threads, "OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--strict", c.strict, "Exit with code 3 when a reconstruction does not converge");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stern-Gerlach spin-1/2 state reconstruction"};
  app.require_subcommand(1);

  Common c;
  ReconstructArgs ra;
  DiagnoseArgs da;

  auto* sim = app.add_subcommand("simulate", "Simulate one measurement campaign");
  add_common(sim, c, true);

  auto* rec = app.add_subcommand("reconstruct", "Maximum-likelihood reconstruction from records");
  add_common(rec, c, true);
  rec->add_option("records,--records", ra.records, "Records file (.json or .csv)")->required();
  rec->add_option("--oracle", ra.oracle, "Also run the grid oracle at this resolution");
  rec->add_flag("--linear", ra.linear, "Also run three-axis linear inversion");

  auto* exp = app.add_subcommand("experiment", "Run a repeated experiment");
  add_common(exp, c, true);

  auto* dia = app.add_subcommand("diagnose", "Renormalized-POM diagnostics at a state");
  add_common(dia, c, true);
  dia->add_option("records,--records", da.records, "Records file (.json or .csv)")->required();
  dia->add_option("--state", da.state, "State JSON (result document or {\"r\":[..]})")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  if (c.threads > 0) omp_set_num_threads(c.threads);

  try {
    if (*sim) return cmd_simulate(c);
    if (*rec) return cmd_reconstruct(c, ra);
    if (*exp) return cmd_experiment(c);
    if (*dia) return cmd_diagnose(c, da);
  } catch (const IoError& e) {
    std::cerr << "sgtomo: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "sgtomo: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "sgtomo: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
