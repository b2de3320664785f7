#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ringlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// An exception ended the check; detail holds the message.
  bool numeric_failure = false;
  double measured = 0.0;
  double threshold = 0.0;
  /// "<=" or ">="
  std::string relation = "<=";
  std::string detail;
  double seconds = 0.0;
};

struct CriteriaOptions {
  int threads = 1;
  std::uint64_t seed = 20240817;
  /// Replaces the primary threshold of a criterion.
  std::map<int, double> thresholds;
  /// Reduced sizes; only meaningful for comparing runs with each other.
  bool quick = false;
  /// Artifacts (the spectrum SVG) go here when non-empty.
  std::string output_dir;
  std::string config_hash;
};

constexpr int kCriterionCount = 15;

const char* criterion_name(int id);
double default_threshold(int id);

/// analytic, ring, simulation, matrix, full.
const std::vector<std::string>& bundle_names();
/// Throws ErrorCode::Config for unknown names.
std::vector<int> bundle_criteria(const std::string& bundle);

CriterionResult run_criterion(int id, const CriteriaOptions& options);
std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const CriteriaOptions& options,
                                          const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  7 matrix subordination residual scaling: 0.31 <= 0.6 (...)"
std::string summary_line(const CriterionResult& r);

/// Columns id, name, measured, threshold, pass; no timings, so runs compare byte for byte.
void write_criteria_csv(const std::vector<CriterionResult>& results, const std::string& config_hash,
                        std::ostream& out);

}  // namespace ringlab
