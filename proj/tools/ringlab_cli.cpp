#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ringlab/ringlab.h"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericFailure = 3 };

int report_error(rl_status s) {
  std::fprintf(stderr, "error: %s: %s\n", rl_status_name(s), rl_last_error());
  return s == RL_CONFIG || s == RL_IO || s == RL_INVALID_ARGUMENT ? kConfigError : kNumericFailure;
}

struct ConfigHandle {
  rl_config* p = nullptr;
  ~ConfigHandle() { rl_config_free(p); }
};

int list_laws() {
  for (size_t i = 0; i < rl_law_count(); ++i) std::printf("%-24s %s\n", rl_law_syntax(i), rl_law_description(i));
  return kPass;
}

int run(const std::string& path, const std::string& out, int threads, const std::vector<uint64_t>& seed) {
  ConfigHandle cfg;
  if (rl_status s = rl_config_load(path.c_str(), &cfg.p)) return report_error(s);
  if (!seed.empty())
    if (rl_status s = rl_config_override_seed(cfg.p, seed.front())) return report_error(s);
  rl_run* r = nullptr;
  if (rl_status s = rl_run_experiments(cfg.p, out.empty() ? nullptr : out.c_str(), threads, &r))
    return report_error(s);
  for (size_t i = 0; i < rl_run_experiment_count(r); ++i) {
    const char* err = rl_run_experiment_error(r, i);
    std::printf("%s %s%s%s\n", rl_run_experiment_passed(r, i) ? "ok  " : "FAIL", rl_run_experiment_name(r, i),
                *err ? ": " : "", err);
  }
  std::printf("config_hash %s, %.1f s\n", rl_config_hash(cfg.p), rl_run_wall_seconds(r));
  const int code = rl_run_numeric_failure(r) ? kNumericFailure : rl_run_all_passed(r) ? kPass : kCheckFailed;
  rl_run_free(r);
  return code;
}

void print_line(const rl_criterion* c, void*) {
  std::printf("%s\n", c->summary);
  std::fflush(stdout);
}

int verify(const std::string& path, std::string bundle, const std::string& out, int threads,
           const std::vector<uint64_t>& seed, bool quick, const std::map<int, double>& tolerances) {
  ConfigHandle cfg;
  if (!path.empty())
    if (rl_status s = rl_config_load(path.c_str(), &cfg.p)) return report_error(s);
  rl_verify_options o;
  rl_verify_options_init(&o);
  if (cfg.p) {
    o.seed = rl_config_seed(cfg.p);
    o.threads = rl_config_threads(cfg.p);
    if (bundle.empty() && rl_config_verify_bundle(cfg.p)) bundle = rl_config_verify_bundle(cfg.p);
  }
  if (bundle.empty()) bundle = "analytic";
  if (!seed.empty()) o.seed = seed.front();
  if (threads > 0) o.threads = threads;
  o.quick = quick;
  if (!out.empty()) o.output_dir = out.c_str();
  std::vector<int> ids;
  std::vector<double> values;
  for (const auto& [id, v] : tolerances) {
    ids.push_back(id);
    values.push_back(v);
  }
  o.threshold_ids = ids.data();
  o.threshold_values = values.data();
  o.threshold_count = ids.size();

  rl_verify* v = nullptr;
  if (rl_status s = rl_verify_run(bundle.c_str(), cfg.p, &o, print_line, nullptr, &v)) return report_error(s);
  if (!out.empty()) {
    const std::string csv = out + "/criteria.csv";
    if (rl_status s = rl_verify_write_csv(v, csv.c_str())) {
      rl_verify_free(v);
      return report_error(s);
    }
  }
  const int code = rl_verify_numeric_failure(v) ? kNumericFailure : rl_verify_all_passed(v) ? kPass : kCheckFailed;
  rl_verify_free(v);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free convolution, single ring and local law numerics"};
  app.set_version_flag("--version", rl_version());
  app.require_subcommand(1);

  std::string config, out, bundle;
  int threads = 0;
  std::vector<uint64_t> seed;
  bool quick = false;
  std::map<int, double> tolerances;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiments of a config file");
  run_cmd->add_option("--config,-c", config, "YAML config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out,-o", out, "Output directory (default: the config's output)");
  run_cmd->add_option("--threads,-j", threads, "Worker threads")->check(CLI::Range(1, 256));
  run_cmd->add_option("--seed", seed, "Replace every seed")->expected(1);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run acceptance criteria");
  verify_cmd->add_option("--config,-c", config, "YAML config with a verify section")->check(CLI::ExistingFile);
  verify_cmd->add_option("--bundle,-b", bundle, "analytic, ring, simulation, matrix or full");
  verify_cmd->add_option("--out,-o", out, "Directory for criteria.csv and figures");
  verify_cmd->add_option("--threads,-j", threads, "Worker threads")->check(CLI::Range(1, 256));
  verify_cmd->add_option("--seed", seed, "Base seed")->expected(1);
  verify_cmd->add_option("--tolerance", tolerances, "Replace a threshold: ID VALUE")->expected(0, -1);
  verify_cmd->add_flag("--quick", quick, "Reduced sizes, for comparing runs only");

  app.add_subcommand("list-laws", "Show the law syntax");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kConfigError;
  }

  if (*run_cmd) return run(config, out, threads, seed);
  if (*verify_cmd) return verify(config, bundle, out, threads, seed, quick, tolerances);
  return list_laws();
}
