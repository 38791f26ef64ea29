#pragma once
/// Config-driven experiment runner behind the command-line tool.

#include <functional>
#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

namespace nhl {

inline constexpr const char* kVersion = "1.0.0";

enum ExitStatus { kOk = 0, kConfigInvalid = 2, kNumericalFailure = 3 };

struct RunResult {
  std::map<std::string, std::string> files;  // name relative to output_dir -> bytes
  std::map<std::string, double> scalars;     // headline numbers, also used for sweep rows
  nlohmann::json manifest;
};

/// Parses a config file; syntax errors become ConfigError with line and column.
nlohmann::json load_config(const std::string& path);

/// Validated, fully resolved experiment that has not run yet.
struct PreparedRun {
  std::string output_dir;
  std::function<RunResult()> execute;
};

/// Strict-schema validation and parameter resolution; throws ConfigError naming the offending line.
/// `source_text` is the raw file content used for line lookup (may be empty).
PreparedRun prepare(const nlohmann::json& cfg, const std::string& config_dir, const std::string& source_text = "");

/// Writes result files and manifest.json under output_dir.
void write_outputs(const std::string& output_dir, const RunResult& r);

int run_experiment(const std::string& config_path, std::ostream& log);
int run_sweep(const std::string& config_path, std::ostream& log);
int validate_config(const std::string& config_path, std::ostream& log);

/// Sweep worker count from NHL_WORKERS (default 1).
int worker_count();

}  // namespace nhl
