#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringlab/config.hpp"

namespace ringlab {

const char* software_version();

struct RunOptions {
  std::string output_dir;  ///< empty: config.output
  int threads = 0;         ///< 0: config.threads
};

struct ExperimentOutcome {
  std::string name;
  std::string kind;
  /// Every check the experiment makes held.
  bool passed = true;
  bool numeric_failure = false;
  std::string error;
  std::vector<std::string> artifacts;
  nlohmann::json payload = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
};

struct RunRecord {
  std::string config_hash;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<ExperimentOutcome> experiments;

  bool numeric_failure() const;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

/// Runs every experiment in order and writes CSVs, SVGs, run_record.json and
/// manifest.json into the output directory.
RunRecord run_experiments(const Config& config, const RunOptions& options = {});

/// "# config_hash: <hash>"
std::string hash_line(const std::string& config_hash);

}  // namespace ringlab
