#include "ringlab/ringlab.h"

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "ringlab/config.hpp"
#include "ringlab/criteria.hpp"
#include "ringlab/experiments.hpp"
#include "ringlab/freeconv.hpp"
#include "ringlab/measures.hpp"
#include "ringlab/singlering.hpp"

struct rl_measure {
  ringlab::Measure m;
};

struct rl_config {
  ringlab::Config c;
};

struct rl_run {
  ringlab::RunRecord r;
};

struct rl_verify {
  std::vector<ringlab::CriterionResult> results;
  std::vector<std::string> summaries;
  std::string hash;
};

namespace {

thread_local std::string last_error;

rl_status fail_with(rl_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
rl_status guard(F&& f) {
  last_error.clear();
  try {
    f();
    return RL_OK;
  } catch (const ringlab::Error& e) {
    return fail_with(static_cast<rl_status>(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail_with(RL_INTERNAL, e.what());
  }
}

#define RL_REQUIRE(cond, what) \
  if (!(cond)) return fail_with(RL_INVALID_ARGUMENT, what)

struct LawDoc {
  const char* syntax;
  const char* description;
};

const LawDoc kLaws[] = {
    {"semicircle(R)", "semicircle law of radius R"},
    {"arcsine(c)", "arcsine law on [-c, c]"},
    {"uniform(lo,hi)", "uniform law on [lo, hi]"},
    {"bernoulli(c)", "(delta_c + delta_-c) / 2"},
    {"point(c)", "point mass at c"},
    {"atoms(t1:w1,t2:w2,...)", "finite atomic law with weights summing to 1"},
};

rl_criterion view(const ringlab::CriterionResult& r, const std::string& summary) {
  return {r.id, r.name.c_str(), r.pass ? 1 : 0, r.numeric_failure ? 1 : 0, r.measured, r.threshold,
          r.relation.c_str(), r.detail.c_str(), r.seconds, summary.c_str()};
}

}  // namespace

extern "C" {

const char* rl_version(void) { return ringlab::software_version(); }

const char* rl_status_name(rl_status status) {
  if (status == RL_INTERNAL) return "internal";
  return ringlab::error_code_name(static_cast<ringlab::ErrorCode>(status));
}

const char* rl_last_error(void) { return last_error.c_str(); }

size_t rl_law_count(void) { return sizeof kLaws / sizeof kLaws[0]; }

const char* rl_law_syntax(size_t index) { return index < rl_law_count() ? kLaws[index].syntax : nullptr; }

const char* rl_law_description(size_t index) {
  return index < rl_law_count() ? kLaws[index].description : nullptr;
}

rl_status rl_measure_parse(const char* text, rl_measure** out) {
  RL_REQUIRE(text && out, "null argument");
  return guard([&] { *out = new rl_measure{ringlab::parse_law(text)}; });
}

void rl_measure_free(rl_measure* measure) { delete measure; }

rl_status rl_measure_stieltjes(const rl_measure* mu, double E, double eta, double* re, double* im) {
  RL_REQUIRE(mu && re && im, "null argument");
  return guard([&] {
    const ringlab::cplx m = ringlab::stieltjes(mu->m, {E, eta});
    *re = m.real();
    *im = m.imag();
  });
}

rl_status rl_free_convolution(const rl_measure* mu, const rl_measure* nu, double E, double eta, double* re,
                              double* im) {
  RL_REQUIRE(mu && nu && re && im, "null argument");
  return guard([&] {
    const ringlab::cplx m = ringlab::free_convolve_m(mu->m, nu->m, {E, eta});
    *re = m.real();
    *im = m.imag();
  });
}

rl_status rl_annulus_bounds(const rl_measure* nu, double* a, double* b) {
  RL_REQUIRE(nu && a && b, "null argument");
  return guard([&] {
    const ringlab::AnnulusBounds ab = ringlab::annulus_bounds(nu->m);
    *a = ab.a;
    *b = ab.b;
  });
}

rl_status rl_config_load(const char* path, rl_config** out) {
  RL_REQUIRE(path && out, "null argument");
  return guard([&] { *out = new rl_config{ringlab::load_config(path)}; });
}

rl_status rl_config_parse(const char* text, const char* source, rl_config** out) {
  RL_REQUIRE(text && out, "null argument");
  return guard([&] { *out = new rl_config{ringlab::parse_config(text, source ? source : "<config>")}; });
}

void rl_config_free(rl_config* config) { delete config; }

rl_status rl_config_override_seed(rl_config* config, uint64_t seed) {
  RL_REQUIRE(config, "null argument");
  return guard([&] { ringlab::override_seed(config->c, seed); });
}

uint64_t rl_config_seed(const rl_config* config) { return config ? config->c.seed : 0; }

int rl_config_threads(const rl_config* config) { return config ? config->c.threads : 0; }

const char* rl_config_hash(const rl_config* config) { return config ? config->c.hash.c_str() : ""; }

const char* rl_config_output(const rl_config* config) { return config ? config->c.output.c_str() : ""; }

size_t rl_config_experiment_count(const rl_config* config) {
  return config ? config->c.experiments.size() : 0;
}

const char* rl_config_verify_bundle(const rl_config* config) {
  return config && config->c.verify ? config->c.verify->bundle.c_str() : nullptr;
}

rl_status rl_run_experiments(const rl_config* config, const char* out_dir, int threads, rl_run** out) {
  RL_REQUIRE(config && out, "null argument");
  RL_REQUIRE(threads >= 0, "threads must be non-negative");
  return guard([&] {
    ringlab::RunOptions o;
    if (out_dir) o.output_dir = out_dir;
    o.threads = threads;
    *out = new rl_run{ringlab::run_experiments(config->c, o)};
  });
}

void rl_run_free(rl_run* run) { delete run; }

size_t rl_run_experiment_count(const rl_run* run) { return run ? run->r.experiments.size() : 0; }

const char* rl_run_experiment_name(const rl_run* run, size_t index) {
  return run && index < run->r.experiments.size() ? run->r.experiments[index].name.c_str() : nullptr;
}

int rl_run_experiment_passed(const rl_run* run, size_t index) {
  if (!run || index >= run->r.experiments.size()) return 0;
  const auto& e = run->r.experiments[index];
  return e.passed && !e.numeric_failure;
}

const char* rl_run_experiment_error(const rl_run* run, size_t index) {
  return run && index < run->r.experiments.size() ? run->r.experiments[index].error.c_str() : nullptr;
}

int rl_run_all_passed(const rl_run* run) { return run && run->r.all_passed(); }

int rl_run_numeric_failure(const rl_run* run) { return run && run->r.numeric_failure(); }

double rl_run_wall_seconds(const rl_run* run) { return run ? run->r.wall_seconds : 0.0; }

void rl_verify_options_init(rl_verify_options* options) {
  if (!options) return;
  *options = rl_verify_options{};
  options->threads = 1;
  options->seed = ringlab::CriteriaOptions{}.seed;
}

rl_status rl_bundle_criteria(const char* bundle, int* ids, size_t capacity, size_t* count) {
  RL_REQUIRE(bundle && count, "null argument");
  return guard([&] {
    const std::vector<int> v = ringlab::bundle_criteria(bundle);
    *count = v.size();
    for (size_t i = 0; ids && i < v.size() && i < capacity; ++i) ids[i] = v[i];
  });
}

rl_status rl_verify_run(const char* bundle, const rl_config* config, const rl_verify_options* options,
                        rl_criterion_callback callback, void* user, rl_verify** out) {
  RL_REQUIRE(bundle && out, "null argument");
  rl_verify_options defaults;
  rl_verify_options_init(&defaults);
  const rl_verify_options& o = options ? *options : defaults;
  RL_REQUIRE(o.threads >= 1, "threads must be at least 1");
  RL_REQUIRE(o.threshold_count == 0 || (o.threshold_ids && o.threshold_values), "null threshold arrays");
  return guard([&] {
    const std::vector<int> ids = ringlab::bundle_criteria(bundle);
    ringlab::CriteriaOptions co;
    co.threads = o.threads;
    co.seed = o.seed;
    co.quick = o.quick != 0;
    if (o.output_dir) co.output_dir = o.output_dir;
    if (config) {
      co.config_hash = config->c.hash;
      if (config->c.verify) co.thresholds = config->c.verify->tolerances;
    }
    for (size_t i = 0; i < o.threshold_count; ++i) co.thresholds[o.threshold_ids[i]] = o.threshold_values[i];
    auto v = std::make_unique<rl_verify>();
    v->hash = co.config_hash;
    v->results = ringlab::run_criteria(ids, co, [&](const ringlab::CriterionResult& r) {
      if (!callback) return;
      const std::string s = ringlab::summary_line(r);
      const rl_criterion c = view(r, s);
      callback(&c, user);
    });
    for (const auto& r : v->results) v->summaries.push_back(ringlab::summary_line(r));
    *out = v.release();
  });
}

void rl_verify_free(rl_verify* verify) { delete verify; }

size_t rl_verify_count(const rl_verify* verify) { return verify ? verify->results.size() : 0; }

rl_status rl_verify_get(const rl_verify* verify, size_t index, rl_criterion* out) {
  RL_REQUIRE(verify && out, "null argument");
  RL_REQUIRE(index < verify->results.size(), "index out of range");
  *out = view(verify->results[index], verify->summaries[index]);
  return RL_OK;
}

int rl_verify_all_passed(const rl_verify* verify) {
  if (!verify) return 0;
  for (const auto& r : verify->results)
    if (!r.pass) return 0;
  return 1;
}

int rl_verify_numeric_failure(const rl_verify* verify) {
  if (!verify) return 0;
  for (const auto& r : verify->results)
    if (r.numeric_failure) return 1;
  return 0;
}

rl_status rl_verify_write_csv(const rl_verify* verify, const char* path) {
  RL_REQUIRE(verify && path, "null argument");
  return guard([&] {
    std::ofstream os(path, std::ios::binary);
    ringlab::require(static_cast<bool>(os), ringlab::ErrorCode::Io, std::string("cannot write ") + path);
    ringlab::write_criteria_csv(verify->results, verify->hash, os);
  });
}

}  // extern "C"
