#pragma once

// File formats.
//
//   record        {"a":[ax,ay,az],"N":int,"n_plus":int,"n_minus":int,"x":float}
//   records file  JSON array of records, or CSV with header a_x,a_y,a_z,N,n_plus,n_minus,x
//   result        {"r_est":[..],"iterations":..,"converged":..,"boundary":..,
//                  "log_likelihood":..,"k_residual":..,"r_value":..}
//   diagnostics   {"closure_defect":..,"expectation_defect":..,"rank":1|2,"elements":..}
//   bars.csv      repetition,setting,sign,p_true,p_empirical,p_reconstructed
//   states.csv    repetition,r1,r2,r3,converged,boundary,log_likelihood
//
// CSV floats use 17 significant digits; JSON floats use the shortest
// representation that round-trips. Both are lossless.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgtomo/experiment.hpp"
#include "sgtomo/pom.hpp"

namespace sgtomo {

using json = nlohmann::ordered_json;

/// Malformed document. The message starts with the offending JSON path or
/// CSV line, e.g. "directions[2]: direction norm 0 is below 1e-09".
class FormatError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
  using Error::Error;
};

std::string format_double(double v);

json vec_to_json(const Vec3& v);

json record_to_json(const MeasurementRecord& rec);
MeasurementRecord record_from_json(const json& j, const std::string& where = "record");

json records_to_json(RecordSpan records);
std::vector<MeasurementRecord> records_from_json(const json& j);

std::string records_to_csv(RecordSpan records);
std::vector<MeasurementRecord> records_from_csv(std::string_view text);

json result_to_json(const ReconstructionResult& res);

json diagnostics_to_json(const DiagnosticReport& rep);

json report_to_json(const ExperimentReport& rep);
std::string bars_csv(const ExperimentReport& rep);
std::string states_csv(const ExperimentReport& rep);

/// Polarization from a state file: either a result document ("r_est") or
/// {"r":[x,y,z]}.
Polarization state_from_json(const json& j);

struct OutputPaths {
  std::optional<std::filesystem::path> records;
  std::optional<std::filesystem::path> dir;
};

struct CliConfig {
  ExperimentConfig experiment;
  OutputPaths output;
};

/// Schema-checked config. Unknown keys are rejected. Missing "directions"
/// selects default_directions().
CliConfig config_from_json(const json& j);
json config_to_json(const CliConfig& cfg);

std::string read_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

/// Loads records by extension: .csv as CSV, anything else as JSON.
std::vector<MeasurementRecord> read_records_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace sgtomo
