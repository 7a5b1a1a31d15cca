#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "plilab/errors.hpp"

namespace plilab::cli {

enum class Experiment { ScalarProfile, Flow, HighGain, DtSweep, PliDiagnose, Prox };

/// snake_case name; also the stem of the experiment's output files.
const char* experiment_name(Experiment e);

using ParamValue = std::variant<double, std::vector<double>, std::string>;

/// A fully resolved experiment configuration. params always holds every
/// key of the experiment's schema (defaults filled in); unknown keys are
/// rejected during parsing, never stored.
struct ExperimentConfig {
  Experiment experiment;
  std::map<std::string, ParamValue> params;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

/// Parses CLI arguments (argv without the program name):
///   <experiment> [--config file.json] [--out dir] [--seed n] [--key value]...
/// Precedence: flags > config file > PLI_LAB_SEED env (seed only) > defaults.
/// The experiment may come from the config file when no positional is given.
/// Throws ConfigError on unknown experiments, unknown keys, or bad values.
ExperimentConfig parse_args(const std::vector<std::string>& args);

/// Builds the default configuration for one experiment.
ExperimentConfig default_config(Experiment e);

struct RunResult {
  int exit_code = 0;                 // 0 ok, 2 invalid config, 3 numerical failure
  std::vector<std::string> outputs;  // files written (relative to out_dir)
  std::string error_json;            // machine-readable error when exit_code != 0
};

/// Runs the experiment: writes <name>.csv (plus .svg and any sidecars) and
/// manifest.json into out_dir. Files are written atomically
/// (temp-then-rename). CSV bytes are deterministic for a fixed config+seed.
RunResult run(const ExperimentConfig& config);

/// parse + run + error reporting on stderr; returns the process exit code.
int main_entry(const std::vector<std::string>& args);

/// Lowercase hex SHA-256 of a byte string (manifest hashes).
std::string sha256_hex(const std::string& bytes);

}  // namespace plilab::cli
