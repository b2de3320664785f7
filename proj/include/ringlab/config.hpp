#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ringlab/measures.hpp"

namespace ringlab {

enum class ExperimentKind {
  FreeconvCheck,
  RingLaw,
  SimulateSpectrum,
  SubordinationResidual,
  SchwingerDyson,
  LocalSrt,
  LocalSv,
  Delocalization,
  Hadamard,
};

const char* kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

/// A law as written in a config and the measure it resolves to.
struct LawSpec {
  std::string text;
  Measure measure;
};

/// parse_law with whitespace removed, restricted to probability measures.
LawSpec resolve_law(const std::string& text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::FreeconvCheck;
  std::string name;
  int line = 0;
  std::optional<LawSpec> law;    ///< mu, T law or nu
  std::optional<LawSpec> law_b;  ///< nu or B law
  std::vector<int> N;
  std::uint64_t seed = 0;
  int seeds = 1;
  int samples = 100;
  int repetitions = 1;
  std::vector<double> E;
  std::vector<double> eta;
  cplx z{0.0, 1.0};
  cplx z0{1.9, 0.0};
  /// local-srt scale; 0 selects (log N)^-alpha.
  double eps = 0.5;
  double alpha = 0.2;
  double width = 0.05;
  std::optional<double> tolerance;
  double a = 1.0;
  double tv_norm = 2.0;
  int grid_points = 201;
  double edge_offset = 0.02;
  double h = 1e-2;
  bool svg = true;
};

struct VerifyConfig {
  std::string bundle = "analytic";
  std::map<int, double> tolerances;
};

struct Config {
  std::string source;
  std::string output = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<ExperimentConfig> experiments;
  std::optional<VerifyConfig> verify;
  /// FNV-1a of the config text and any overrides, 16 hex digits.
  std::string hash;
};

/// Errors carry ErrorCode::Config and a "source:line: message" text.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);

/// Replaces every seed and updates the hash.
void override_seed(Config& config, std::uint64_t seed);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace ringlab
