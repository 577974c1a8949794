#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modham/error.hpp"
#include "modham/lattice_model.hpp"
#include "modham/symplectic_core.hpp"

namespace modham {

using Json = nlohmann::json;

struct ModelConfig {
  int n_sites = 0;
  double mass = 0.0;
  double coupling = 1.0;
  Boundary boundary = Boundary::Dirichlet;
  bool operator==(const ModelConfig&) const = default;
};

struct RegionConfig {
  enum class Kind { Sites, Interval, Half };
  Kind kind = Kind::Half;
  std::vector<int> sites;
  int start = 0;
  int length = 0;
  bool operator==(const RegionConfig&) const = default;
};

enum class Task { Kernels, Flow, Kms, EntropyScan, Crosscheck };

std::string_view to_string(Task t);

struct Tolerances {
  double route_tol = 1e-7;
  double kms_tol = 1e-7;
  double quad_tol = 1e-10;
  std::optional<double> sing_tol;  // unset: 1e-10 rescaled to the working precision
  std::optional<double> clip;
  bool operator==(const Tolerances&) const = default;
};

struct OutputConfig {
  std::string directory = "modham_out";
  std::vector<std::string> formats = {"json"};  // subset of {csv, json}
  bool operator==(const OutputConfig&) const = default;
};

struct PrecisionConfig {
  enum class Mode { Auto, Double, Fixed };
  Mode mode = Mode::Auto;
  unsigned digits = 0;  // Fixed only
  bool operator==(const PrecisionConfig&) const = default;
};

struct ScanConfig {
  std::vector<int> lengths;
  std::string placement = "centered";  // or "left"
  bool operator==(const ScanConfig&) const = default;
};

struct KmsConfig {
  std::vector<double> t_grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
  unsigned seed = 7;
  bool operator==(const KmsConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  RegionConfig region;
  std::vector<Task> tasks;
  Tolerances tolerances;
  OutputConfig output;
  PrecisionConfig precision;
  ScanConfig scan;
  KmsConfig kms;
  bool operator==(const RunConfig&) const = default;
};

// Schema errors carry a JSON pointer to the offending key in the message.
RunConfig parse_config(const Json& doc, bool lenient = false,
                       std::vector<std::string>* ignored_keys = nullptr);
RunConfig parse_config_text(const std::string& text, bool lenient = false,
                            std::vector<std::string>* ignored_keys = nullptr);
// "-" reads stdin
RunConfig parse_config_file(const std::string& path, bool lenient = false,
                            std::vector<std::string>* ignored_keys = nullptr);

Json config_to_json(const RunConfig& cfg);

Region resolve_region(const RunConfig& cfg);

// Deterministic text: sorted keys, 2-space indent, doubles as %.17g.
std::string dump_json(const Json& value);

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitConstruction = 3,
  kExitIo = 4,
};

int exit_code_for(ErrorKind kind);

struct ResidualRecord {
  std::string task;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct RunOutcome {
  int exit_code = kExitOk;
  unsigned digits = 0;  // 0 = double
  std::vector<ResidualRecord> residuals;
  std::vector<std::string> files;
  std::optional<std::string> error_kind;
  std::string error_message;
};

enum class RunMode { Tasks, ScanOnly };

RunOutcome run(const RunConfig& cfg, RunMode mode = RunMode::Tasks,
               const std::vector<std::string>& notes = {});

}  // namespace modham
