#include "sgtomo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace sgtomo {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError(where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(where, "unknown key \"" + it.key() + "\"");
    }
  }
}

const json& member(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    fail(where, "integer out of range");
  }
  return v.get<std::int64_t>();
}

Vec3 as_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected an array of 3 numbers");
  return Vec3(as_double(v[0], where + "[0]"), as_double(v[1], where + "[1]"),
              as_double(v[2], where + "[2]"));
}

Direction as_direction(const json& v, const std::string& where) {
  const Vec3 a = as_vec3(v, where);
  try {
    return Direction(a);
  } catch (const InvalidDirection& e) {
    fail(where, e.what());
  }
}

std::string json_name(Sign s) { return s == Sign::plus ? "+" : "-"; }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(where, "not a number: \"" + s + "\"");
  }
  if (used != s.size() || !std::isfinite(v)) fail(where, "not a number: \"" + s + "\"");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    fail(where, "not an integer: \"" + s + "\"");
  }
  if (used != s.size()) fail(where, "not an integer: \"" + s + "\"");
  return v;
}

MeasurementRecord make_record(const Direction& a, std::int64_t n, std::int64_t n_plus,
                              std::int64_t n_minus, std::optional<double> x,
                              const std::string& where) {
  if (n < 1) fail(where, "N must be >= 1");
  MeasurementRecord rec = [&] {
    try {
      return MeasurementRecord::from_counts(MeasurementSetting(a, n), n_plus, n_minus);
    } catch (const ValidationError& e) {
      fail(where, e.what());
    }
  }();
  if (x && std::abs(*x - rec.x) > 1e-12) {
    fail(where, "x = " + format_double(*x) + " disagrees with counts (" + format_double(rec.x) + ")");
  }
  return rec;
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json record_to_json(const MeasurementRecord& rec) {
  json j;
  j["a"] = vec_to_json(rec.direction().vec());
  j["N"] = rec.total();
  j["n_plus"] = rec.n_plus;
  j["n_minus"] = rec.n_minus;
  j["x"] = rec.x;
  return j;
}

MeasurementRecord record_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown(j, {"a", "N", "n_plus", "n_minus", "x"}, where);
  const Direction a = as_direction(member(j, "a", where), where + ".a");
  const std::int64_t n = as_int(member(j, "N", where), where + ".N");
  const std::int64_t np = as_int(member(j, "n_plus", where), where + ".n_plus");
  const std::int64_t nm = as_int(member(j, "n_minus", where), where + ".n_minus");
  std::optional<double> x;
  if (j.contains("x")) x = as_double(j["x"], where + ".x");
  return make_record(a, n, np, nm, x, where);
}

json records_to_json(RecordSpan records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(record_to_json(r));
  return arr;
}

std::vector<MeasurementRecord> records_from_json(const json& j) {
  if (!j.is_array()) fail("records", "expected an array");
  if (j.empty()) fail("records", "no records");
  std::vector<MeasurementRecord> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(record_from_json(j[i], "records[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string records_to_csv(RecordSpan records) {
  std::string s = "a_x,a_y,a_z,N,n_plus,n_minus,x\n";
  for (const auto& r : records) {
    const Vec3& a = r.direction().vec();
    s += format_double(a[0]) + ',' + format_double(a[1]) + ',' + format_double(a[2]) + ',' +
         std::to_string(r.total()) + ',' + std::to_string(r.n_plus) + ',' +
         std::to_string(r.n_minus) + ',' + format_double(r.x) + '\n';
  }
  return s;
}

std::vector<MeasurementRecord> records_from_csv(std::string_view text) {
  std::vector<MeasurementRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto cols = split(line, ',');
    if (header) {
      if (line != "a_x,a_y,a_z,N,n_plus,n_minus,x") fail(where, "unexpected CSV header");
      header = false;
      continue;
    }
    if (cols.size() != 7) fail(where, "expected 7 columns");
    Vec3 a(parse_double(cols[0], where), parse_double(cols[1], where),
           parse_double(cols[2], where));
    Direction dir = [&] {
      try {
        return Direction(a);
      } catch (const InvalidDirection& e) {
        fail(where, e.what());
      }
    }();
    out.push_back(make_record(dir, parse_int(cols[3], where), parse_int(cols[4], where),
                              parse_int(cols[5], where), parse_double(cols[6], where), where));
  }
  if (header) fail("records", "missing CSV header");
  if (out.empty()) fail("records", "no records");
  return out;
}

json result_to_json(const ReconstructionResult& res) {
  json j;
  j["r_est"] = vec_to_json(res.r_est.vec());
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["boundary"] = res.boundary;
  j["log_likelihood"] = res.log_likelihood;
  j["k_residual"] = res.k_residual;
  j["r_value"] = res.r_value;
  return j;
}

json diagnostics_to_json(const DiagnosticReport& rep) {
  json j;
  j["closure_defect"] = rep.closure_defect;
  j["expectation_defect"] = rep.expectation_defect;
  j["rank"] = rep.rank;
  j["elements"] = rep.elements;
  return j;
}

json report_to_json(const ExperimentReport& rep) {
  json j;
  j["config"] = config_to_json(CliConfig{rep.config, {}});
  json reps = json::array();
  for (std::size_t k = 0; k < rep.per_repetition.size(); ++k) {
    const auto& r = rep.per_repetition[k];
    json e;
    e["repetition"] = k;
    e["records"] = records_to_json(r.records);
    e["reconstruction"] = result_to_json(r.reconstruction);
    json bars = json::array();
    for (const auto& b : r.bars) {
      bars.push_back({{"setting", b.setting_index},
                      {"sign", json_name(b.sign)},
                      {"p_true", b.p_true},
                      {"p_empirical", b.p_empirical},
                      {"p_reconstructed", b.p_reconstructed}});
    }
    e["bars"] = std::move(bars);
    if (r.oracle) {
      e["oracle"] = {{"resolution", r.oracle->resolution},
                     {"r", vec_to_json(r.oracle->r)},
                     {"log_likelihood", r.oracle->log_likelihood},
                     {"distance", r.oracle->distance}};
    }
    reps.push_back(std::move(e));
  }
  j["per_repetition"] = std::move(reps);
  const auto& s = rep.summary;
  j["summary"] = {{"mean_r_est", vec_to_json(s.mean_r_est)},
                  {"mean_abs_error", s.mean_abs_error},
                  {"rms_error", s.rms_error},
                  {"fraction_boundary", s.fraction_boundary},
                  {"fraction_converged", s.fraction_converged}};
  return j;
}

std::string bars_csv(const ExperimentReport& rep) {
  std::string s = "repetition,setting,sign,p_true,p_empirical,p_reconstructed\n";
  for (std::size_t k = 0; k < rep.per_repetition.size(); ++k) {
    for (const auto& b : rep.per_repetition[k].bars) {
      s += std::to_string(k) + ',' + std::to_string(b.setting_index) + ',' +
           (b.sign == Sign::plus ? "+1" : "-1") + ',' + format_double(b.p_true) + ',' +
           format_double(b.p_empirical) + ',' + format_double(b.p_reconstructed) + '\n';
    }
  }
  return s;
}

std::string states_csv(const ExperimentReport& rep) {
  std::string s = "repetition,r1,r2,r3,converged,boundary,log_likelihood\n";
  for (std::size_t k = 0; k < rep.per_repetition.size(); ++k) {
    const auto& rec = rep.per_repetition[k].reconstruction;
    const Vec3& r = rec.r_est.vec();
    s += std::to_string(k) + ',' + format_double(r[0]) + ',' + format_double(r[1]) + ',' +
         format_double(r[2]) + ',' + (rec.converged ? "1" : "0") + ',' +
         (rec.boundary ? "1" : "0") + ',' + format_double(rec.log_likelihood) + '\n';
  }
  return s;
}

Polarization state_from_json(const json& j) {
  require_object(j, "state");
  const char* key = j.contains("r_est") ? "r_est" : "r";
  const Vec3 r = as_vec3(member(j, key, "state"), std::string("state.") + key);
  try {
    return Polarization(r);
  } catch (const OutOfBall& e) {
    fail(std::string("state.") + key, e.what());
  }
}

CliConfig config_from_json(const json& j) {
  require_object(j, "config");
  reject_unknown(j,
                 {"directions", "n_particles", "r_true", "repetitions", "seed", "solver",
                  "grid_check", "output"},
                 "config");
  CliConfig cfg;
  ExperimentConfig& e = cfg.experiment;

  if (j.contains("directions")) {
    const json& d = j["directions"];
    if (!d.is_array() || d.empty()) fail("directions", "expected a non-empty array");
    e.directions.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      e.directions.push_back(as_direction(d[i], "directions[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("n_particles")) {
    e.n_particles = as_int(j["n_particles"], "n_particles");
    if (e.n_particles < 1) fail("n_particles", "must be >= 1");
  }
  if (j.contains("r_true")) {
    const Vec3 r = as_vec3(j["r_true"], "r_true");
    try {
      e.r_true = Polarization(r);
    } catch (const OutOfBall& ex) {
      fail("r_true", ex.what());
    }
  }
  if (j.contains("repetitions")) {
    const std::int64_t reps = as_int(j["repetitions"], "repetitions");
    if (reps < 1 || reps > INT32_MAX) fail("repetitions", "must be a positive int");
    e.repetitions = static_cast<int>(reps);
  }
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0)) {
      fail("seed", "expected a non-negative integer");
    }
    e.seed = RngSeed{s.get<std::uint64_t>()};
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    require_object(s, "solver");
    reject_unknown(s, {"tol_k", "max_iterations", "damping_min", "ball_margin"}, "solver");
    if (s.contains("tol_k")) e.solver.tol_k = as_double(s["tol_k"], "solver.tol_k");
    if (s.contains("max_iterations")) {
      const std::int64_t it = as_int(s["max_iterations"], "solver.max_iterations");
      if (it < 1 || it > INT32_MAX) fail("solver.max_iterations", "must be a positive int");
      e.solver.max_iterations = static_cast<int>(it);
    }
    if (s.contains("damping_min")) {
      e.solver.damping_min = as_double(s["damping_min"], "solver.damping_min");
    }
    if (s.contains("ball_margin")) {
      e.solver.ball_margin = as_double(s["ball_margin"], "solver.ball_margin");
    }
    try {
      e.solver.validate();
    } catch (const ValidationError& ex) {
      fail("solver", ex.what());
    }
  }
  if (j.contains("grid_check") && !j["grid_check"].is_null()) {
    const double g = as_double(j["grid_check"], "grid_check");
    if (!(g > 0.0 && g <= 0.5)) fail("grid_check", "resolution must lie in (0, 0.5]");
    e.grid_check = g;
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    require_object(o, "output");
    reject_unknown(o, {"records", "dir"}, "output");
    if (o.contains("records")) {
      if (!o["records"].is_string()) fail("output.records", "expected a string");
      cfg.output.records = o["records"].get<std::string>();
    }
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) fail("output.dir", "expected a string");
      cfg.output.dir = o["dir"].get<std::string>();
    }
  }
  return cfg;
}

json config_to_json(const CliConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  json j;
  json dirs = json::array();
  for (const auto& d : e.directions) dirs.push_back(vec_to_json(d.vec()));
  j["directions"] = std::move(dirs);
  j["n_particles"] = e.n_particles;
  j["r_true"] = vec_to_json(e.r_true.vec());
  j["repetitions"] = e.repetitions;
  j["seed"] = e.seed.value;
  j["solver"] = {{"tol_k", e.solver.tol_k},
                 {"max_iterations", e.solver.max_iterations},
                 {"damping_min", e.solver.damping_min},
                 {"ball_margin", e.solver.ball_margin}};
  j["grid_check"] = e.grid_check ? json(*e.grid_check) : json(nullptr);
  if (cfg.output.records || cfg.output.dir) {
    json o = json::object();
    if (cfg.output.records) o["records"] = cfg.output.records->string();
    if (cfg.output.dir) o["dir"] = cfg.output.dir->string();
    j["output"] = std::move(o);
  }
  return j;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return os.str();
}

json read_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<MeasurementRecord> read_records_file(const fs::path& path) {
  if (path.extension() == ".csv") return records_from_csv(read_file(path));
  return records_from_json(read_json_file(path));
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

} // namespace sgtomo
