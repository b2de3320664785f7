#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "ringlab/ringlab.h"

using Catch::Approx;

TEST_CASE("measures through the C API") {
  rl_measure* sc = nullptr;
  REQUIRE(rl_measure_parse("semicircle(2)", &sc) == RL_OK);
  double re = 0.0, im = 0.0;
  REQUIRE(rl_measure_stieltjes(sc, 0.0, 1.0, &re, &im) == RL_OK);
  // (-i + sqrt(-5)) / 2
  CHECK(re == Approx(0.0).margin(1e-14));
  CHECK(im == Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-12));

  rl_measure* shift = nullptr;
  REQUIRE(rl_measure_parse("point(0.7)", &shift) == RL_OK);
  double cre = 0.0, cim = 0.0;
  REQUIRE(rl_free_convolution(sc, shift, 0.7, 1.0, &cre, &cim) == RL_OK);
  CHECK(cre == Approx(re).margin(1e-12));
  CHECK(cim == Approx(im).epsilon(1e-12));

  CHECK(rl_measure_stieltjes(sc, 0.0, -1.0, &re, &im) != RL_OK);
  CHECK(std::strlen(rl_last_error()) > 0);
  rl_measure_free(sc);
  rl_measure_free(shift);

  rl_measure* u = nullptr;
  REQUIRE(rl_measure_parse("uniform(0.5,4)", &u) == RL_OK);
  double a = 0.0, b = 0.0;
  REQUIRE(rl_annulus_bounds(u, &a, &b) == RL_OK);
  CHECK(a == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(b == Approx(std::sqrt(63.875 / 10.5)).epsilon(1e-12));
  rl_measure_free(u);

  rl_measure* bad = nullptr;
  CHECK(rl_measure_parse("cauchy(1)", &bad) != RL_OK);
  CHECK(bad == nullptr);
  CHECK(rl_measure_parse(nullptr, &bad) == RL_INVALID_ARGUMENT);
}

TEST_CASE("law listing and status names") {
  REQUIRE(rl_law_count() == 6);
  for (size_t i = 0; i < rl_law_count(); ++i) {
    std::string syntax = rl_law_syntax(i);
    CHECK(!syntax.empty());
    CHECK(std::strlen(rl_law_description(i)) > 0);
  }
  CHECK(rl_law_syntax(rl_law_count()) == nullptr);
  CHECK(std::string(rl_status_name(RL_CONFIG)) == "config");
  CHECK(std::string(rl_status_name(RL_INTERNAL)) == "internal");
  CHECK(std::string(rl_version()).size() > 0);
}

TEST_CASE("config errors carry the line") {
  rl_config* c = nullptr;
  const char* text = "seed: 1\nexperiments:\n  - kind: ring-law\n    law: uniform(0.5,4)\n    grid_pionts: 41\n";
  CHECK(rl_config_parse(text, "t.yaml", &c) == RL_CONFIG);
  CHECK(std::string(rl_last_error()).rfind("t.yaml:5:", 0) == 0);
  CHECK(rl_config_parse("experiments: []\n", "t.yaml", &c) == RL_CONFIG);
  CHECK(rl_config_load("/nonexistent/x.yaml", &c) != RL_OK);

  REQUIRE(rl_config_parse("seed: 5\nthreads: 2\n", "ok.yaml", &c) == RL_OK);
  CHECK(rl_config_seed(c) == 5);
  CHECK(rl_config_threads(c) == 2);
  CHECK(rl_config_verify_bundle(c) == nullptr);
  const std::string h = rl_config_hash(c);
  CHECK(h.size() == 16);
  REQUIRE(rl_config_override_seed(c, 9) == RL_OK);
  CHECK(rl_config_seed(c) == 9);
  CHECK(std::string(rl_config_hash(c)) != h);
  rl_config_free(c);
}

TEST_CASE("bundles") {
  int ids[16];
  size_t n = 0;
  REQUIRE(rl_bundle_criteria("analytic", ids, 16, &n) == RL_OK);
  CHECK(n == 6);
  REQUIRE(rl_bundle_criteria("full", ids, 16, &n) == RL_OK);
  CHECK(n == 15);
  CHECK(ids[14] == 15);
  CHECK(rl_bundle_criteria("everything", ids, 16, &n) == RL_CONFIG);
}

namespace {
void count(const rl_criterion*, void* user) { ++*static_cast<int*>(user); }
}  // namespace

TEST_CASE("verify through the C API") {
  rl_verify_options o;
  rl_verify_options_init(&o);
  int seen = 0;
  rl_verify* v = nullptr;
  REQUIRE(rl_verify_run("analytic", nullptr, &o, count, &seen, &v) == RL_OK);
  CHECK(seen == 6);
  CHECK(rl_verify_count(v) == 6);
  CHECK(rl_verify_all_passed(v));
  CHECK_FALSE(rl_verify_numeric_failure(v));
  rl_criterion c;
  REQUIRE(rl_verify_get(v, 0, &c) == RL_OK);
  CHECK(c.id == 1);
  CHECK(c.pass == 1);
  CHECK(std::string(c.summary).rfind("PASS  1 ", 0) == 0);
  CHECK(rl_verify_get(v, 6, &c) == RL_INVALID_ARGUMENT);
  rl_verify_free(v);

  rl_config* cfg = nullptr;
  REQUIRE(rl_config_parse("seed: 2\nverify:\n  bundle: analytic\n  tolerances:\n    11: 1.0e-20\n", "v.yaml", &cfg) ==
          RL_OK);
  CHECK(std::string(rl_config_verify_bundle(cfg)) == "analytic");
  REQUIRE(rl_verify_run("analytic", cfg, &o, nullptr, nullptr, &v) == RL_OK);
  CHECK_FALSE(rl_verify_all_passed(v));
  REQUIRE(rl_verify_get(v, 5, &c) == RL_OK);
  CHECK(c.id == 11);
  CHECK(c.pass == 0);
  CHECK(c.threshold == 1e-20);
  rl_verify_free(v);

  const int id = 11;
  const double loose = 0.5;
  o.threshold_ids = &id;
  o.threshold_values = &loose;
  o.threshold_count = 1;
  REQUIRE(rl_verify_run("analytic", cfg, &o, nullptr, nullptr, &v) == RL_OK);
  CHECK(rl_verify_all_passed(v));
  rl_verify_free(v);
  rl_config_free(cfg);

  o.threads = 0;
  CHECK(rl_verify_run("analytic", nullptr, &o, nullptr, nullptr, &v) == RL_INVALID_ARGUMENT);
}
