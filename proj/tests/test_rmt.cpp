#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ringlab/rmt.hpp"
#include "ringlab/singlering.hpp"

using namespace ringlab;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

ModelSpec ones_spec(int N, std::uint64_t seed, bool with_b) {
  ModelSpec s;
  s.N = N;
  s.seed = seed;
  s.T.assign(N, 1.0);
  if (with_b) s.B = std::vector<double>(N, 1.0);
  return s;
}

ModelSpec alternating_spec(int N, std::uint64_t seed) {
  const Measure law = Measure::from_atoms({{1.0, 0.5}, {2.0, 0.5}});
  return model_from_laws(law, N, seed, &law);
}

}  // namespace

TEST_CASE("seed derivation") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(derive_seed(5, 0) != derive_seed(5, 1));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
  CHECK(derive_seed(5, 3) != derive_seed(6, 3));
}

TEST_CASE("quantile values") {
  const auto u = quantile_values(Measure::uniform(0.0, 1.0), 4);
  REQUIRE(u.size() == 4);
  CHECK(u[0] == Approx(0.125).margin(1e-12));
  CHECK(u[3] == Approx(0.875).margin(1e-12));
  const auto b = quantile_values(Measure::from_atoms({{1.0, 0.5}, {2.0, 0.5}}), 4);
  CHECK(b == std::vector<double>{1.0, 1.0, 2.0, 2.0});
  const auto f = quantile_values(Measure::uniform(0.5, 4.0), 500);
  CHECK(f.front() == Approx(0.5 + 3.5 * 0.5 / 500).margin(1e-10));
  CHECK(std::is_sorted(f.begin(), f.end()));
  CHECK_THROWS_AS(quantile_values(Measure::combine(Measure::point(1), 2.0, Measure::point(2), 0.0), 4), Error);
}

TEST_CASE("model spec validation") {
  ModelSpec s = ones_spec(3, 1, false);
  CHECK_NOTHROW(s.validate());
  CHECK(s.K() == 1.0);
  s.T[1] = 11.0;
  CHECK_THROWS_AS(s.validate(), Error);
  try {
    s.validate();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRegime);
  }
  s.T[1] = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK_THROWS_AS(ones_spec(1, 1, false).validate(), Error);
  ModelSpec b = ones_spec(3, 1, true);
  b.B->pop_back();
  CHECK_THROWS_AS(b.validate(), Error);
}

TEST_CASE("Haar unitaries") {
  std::mt19937_64 rng(3);
  const CMatrix u1 = haar_unitary(1, rng);
  CHECK(std::abs(u1(0, 0)) == Approx(1.0).margin(1e-14));

  const CMatrix U = haar_unitary(60, rng);
  CHECK(unitarity_defect(U) <= 1e-10);
  const CVector ev = eigenvalues(U);
  for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(std::abs(ev(i)) == Approx(1.0).margin(1e-8));

  const int n = 2000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::norm(haar_unitary(10, rng)(0, 0));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 0.1) <= 3.0 * se);
}

TEST_CASE("sampled spectra") {
  const SpectralSample s = sample_model(ones_spec(50, 9, false), {}, 0);
  REQUIRE(s.eigenvalues.size() == 50);
  for (cplx l : s.eigenvalues) CHECK(std::abs(l) == Approx(1.0).margin(1e-8));
  for (double v : s.singular_values) CHECK(v == Approx(1.0).margin(1e-10));
  CHECK(s.seed_used == derive_seed(9, 0));

  const ModelSpec fig = model_from_laws(Measure::uniform(0.5, 4.0), 200, 17);
  const SpectralSample f = sample_model(fig, {}, 0);
  CHECK(std::is_sorted(f.singular_values.rbegin(), f.singular_values.rend()));
  double log_l = 0.0, log_s = 0.0;
  int inside = 0;
  for (cplx l : f.eigenvalues) {
    log_l += std::log(std::abs(l));
    const double r = std::abs(l);
    if (r >= std::sqrt(2.0) - 0.15 && r <= std::sqrt(73.0 / 12.0) + 0.15) ++inside;
  }
  for (double v : f.singular_values) log_s += std::log(v);
  CHECK(log_l == Approx(log_s).epsilon(1e-6));
  CHECK(inside >= 0.98 * 200);

  SampleRequest vec;
  vec.vectors = true;
  vec.eigenvalues = false;
  const SpectralSample v = sample_model(fig, vec, 1);
  REQUIRE(v.left_vectors);
  CHECK(unitarity_defect(*v.left_vectors) <= 1e-10);
  CHECK(unitarity_defect(*v.right_vectors) <= 1e-10);
  CHECK(v.eigenvalues.empty());
}

TEST_CASE("singular values of a sum of two unitaries follow the arcsine law") {
  const int N = 1000;
  ModelSpec spec = ones_spec(N, 21, true);
  spec.a_is_diagonal = true;
  SampleRequest req;
  req.eigenvalues = false;
  std::vector<double> s = sample_model(spec, req, 0).singular_values;
  std::sort(s.begin(), s.end());
  // P(s <= x) = (2 / pi) asin(x / 2) for s = 2 |cos(theta / 2)|
  double ks = 0.0;
  for (int i = 0; i < N; ++i) {
    const double F = 2.0 / kPi * std::asin(std::min(1.0, s[i] / 2.0));
    ks = std::max({ks, std::abs(F - double(i) / N), std::abs(F - double(i + 1) / N)});
  }
  CHECK(ks <= 0.05);
}

TEST_CASE("hermitized spectra and resolvent traces") {
  const std::vector<double> s{1.0, 2.0};
  CHECK(hermitize_spectrum(s) == std::vector<double>{-2.0, -1.0, 1.0, 2.0});
  const std::vector<double> zeros(3, 0.0);
  for (double v : hermitize_spectrum(zeros)) CHECK(v == 0.0);
  const auto h = hermitize_spectrum(s);
  CHECK(empirical_measure(h) == symmetrize(empirical_measure(s)));

  const std::vector<double> ones(5, 1.0);
  CHECK(std::abs(resolvent_trace(ones, {0.0, 1.0}) - 0.5 * I) <= 1e-15);
  const cplx z(0.3, 0.7);
  CHECK(std::abs(resolvent_trace(zeros, UpperHalfPoint::from(z)) + 1.0 / z) <= 1e-15);
  CHECK(std::abs(resolvent_trace(s, {0.0, 1.0}) - 0.35 * I) <= 1e-15);

  const SpectralSample f = sample_model(model_from_laws(Measure::uniform(0.5, 4.0), 100, 4), {}, 0);
  const auto herm = hermitize_spectrum(f.singular_values);
  for (cplx w : {cplx(0.1, 0.5), cplx(2.0, 0.05), cplx(-1.0, 2.0)}) {
    const UpperHalfPoint p = UpperHalfPoint::from(w);
    CHECK(std::abs(resolvent_trace(f.singular_values, p) - stieltjes(empirical_measure(herm), p)) <= 1e-12);
  }
  CHECK_THROWS_AS(resolvent_trace(std::vector<double>{}, {0.0, 1.0}), Error);
}

TEST_CASE("block traces and the hermitized resolvent") {
  const auto [a, b] = tau_block(CMatrix::Identity(6, 6));
  CHECK(a == cplx(1.0));
  CHECK(b == cplx(1.0));
  std::mt19937_64 rng(8);
  const CMatrix X = complex_ginibre(3, rng);
  const auto [c, d] = tau_block(hermitization(X));
  CHECK(c == cplx(0.0));
  CHECK(d == cplx(0.0));
  CHECK_THROWS_AS(tau_block(CMatrix::Identity(3, 3)), Error);

  std::mt19937_64 r2(derive_seed(12, 0));
  const ModelSpec spec = ones_spec(2, 12, true);
  const CMatrix M = model_matrix(spec, r2);
  const CMatrix H = hermitization(M);
  const CMatrix oracle = (H - I * CMatrix::Identity(4, 4)).inverse();
  const CMatrix G = hermitized_resolvent(M, I);
  CHECK((G - oracle).cwiseAbs().maxCoeff() <= 1e-12);
  const auto [g1, g2] = tau_block(G);
  CHECK(std::abs(g1 - oracle.topLeftCorner(2, 2).trace() / 2.0) <= 1e-12);
  CHECK(std::abs(g2 - oracle.bottomRightCorner(2, 2).trace() / 2.0) <= 1e-12);
  CHECK_THROWS_AS(hermitized_resolvent(M, cplx(1.0, 0.0)), Error);
}

TEST_CASE("subordination estimates") {
  const UpperHalfPoint z{0.0, 1.0};
  SECTION("B = 0 is exact") {
    ModelSpec spec = model_from_laws(Measure::from_atoms({{1.0, 0.5}, {2.0, 0.5}}), 20, 5);
    spec.B = std::vector<double>(20, 0.0);
    const SubordinationEstimate e = estimate_subordination(spec, z, 4);
    CHECK(e.f_B_emp == cplx(0.0));
    CHECK(e.S_B_emp == cplx(0.0));
    CHECK(e.resolvent_residual_A <= 1e-15);
    CHECK(e.consistency_defect <= 1e-10);
    // m_H(i) of A = diag(1, 2) is the average of -i / (i^2 - t^2)
    CHECK(std::abs(e.m_H_emp - 0.5 * (0.5 * I + 0.2 * I)) <= 1e-14);
  }
  SECTION("A = 0 swaps the roles") {
    ModelSpec spec;
    spec.N = 30;
    spec.seed = 6;
    spec.T.assign(30, 0.0);
    spec.B = quantile_values(Measure::from_atoms({{1.0, 0.5}, {2.0, 0.5}}), 30);
    const SubordinationEstimate e = estimate_subordination(spec, z, 20);
    CHECK(std::abs(e.S_A_emp) <= 3.0 * e.se_S_A + 1e-12);
    CHECK(e.resolvent_residual_B <= 1e-10);
    CHECK(e.consistency_defect <= 1e-10);
  }
  SECTION("general models") {
    const SubordinationEstimate e = estimate_subordination(alternating_spec(40, 7), z, 10);
    CHECK(e.consistency_defect <= 1e-10);
    CHECK(e.im_s_ok);
    CHECK(e.samples == 10);
    CHECK(e.S_A_emp.imag() > 0.0);
    CHECK(e.S_B_emp.imag() > 0.0);
    CHECK(e.se_m_H > 0.0);
    CHECK(e.resolvent_residual_A > 0.0);
    CHECK_FALSE(e.raw_residual_A);
    EstimateOptions raw;
    raw.raw_norms = true;
    const SubordinationEstimate r = estimate_subordination(alternating_spec(40, 7), z, 10, raw);
    REQUIRE(r.raw_residual_A);
    CHECK(*r.raw_residual_A >= r.resolvent_residual_A - 1e-12);
    CHECK(r.m_H_emp == e.m_H_emp);
    CHECK(std::abs(r.trace_residual_B_over_N - 2.0 * r.trace_residual_B) <= 1e-15);
  }
  CHECK_THROWS_AS(estimate_subordination(alternating_spec(10, 1), z, 1), Error);
}

TEST_CASE("Schwinger-Dyson residual") {
  const UpperHalfPoint z{0.0, 1.0};
  ModelSpec zero_b = model_from_laws(Measure::point(1.0), 10, 2);
  zero_b.B = std::vector<double>(10, 0.0);
  CHECK(schwinger_dyson_residual(zero_b, z, 3).residual == 0.0);

  const SchwingerDysonResult tiny = schwinger_dyson_residual(ones_spec(2, 4, true), z, 2);
  CHECK(tiny.residual > 1e-6);
  CHECK(tiny.standard_error >= 0.0);

  EstimateOptions raw;
  raw.raw_norms = true;
  const SchwingerDysonResult r = schwinger_dyson_residual(alternating_spec(20, 3), z, 4, raw);
  REQUIRE(r.raw_residual);
  CHECK(*r.raw_residual >= r.residual - 1e-12);
}

TEST_CASE("block structure of the averaged resolvent") {
  const UpperHalfPoint z{0.0, 1.0};
  ModelSpec zero_b = alternating_spec(10, 2);
  zero_b.B = std::vector<double>(10, 0.0);
  CHECK(block_structure_defect(zero_b, z, 3) == 0.0);

  const ModelSpec spec = alternating_spec(50, 13);
  const double d100 = block_structure_defect(spec, z, 100);
  const double d400 = block_structure_defect(spec, z, 400);
  CHECK(d400 / d100 == Approx(0.5).margin(0.2));
}

TEST_CASE("delocalization statistics") {
  ModelSpec id;
  id.N = 20;
  id.T.assign(20, 1.0);
  id.a_is_diagonal = true;
  SampleRequest req;
  req.vectors = true;
  const SpectralSample s = sample_model(id, req, 0);
  const DelocalizationStats d = delocalization_stats(s, 1.0, 0.2);
  CHECK(d.count_in_window == 20);
  CHECK(d.max_u_component_sq == Approx(1.0).margin(1e-12));
  CHECK(d.max_v_component_sq == Approx(1.0).margin(1e-12));

  const DelocalizationStats none = delocalization_stats(s, 5.0, 0.1);
  CHECK(none.count_in_window == 0);
  CHECK(none.max_u_component_sq == -1.0);

  SpectralSample one;
  one.singular_values = {2.0};
  one.left_vectors = CMatrix::Constant(1, 1, cplx(0.6, 0.8));
  one.right_vectors = CMatrix::Constant(1, 1, cplx(1.0, 0.0));
  CHECK(delocalization_stats(one, 2.0, 0.1).max_u_component_sq == Approx(1.0).margin(1e-15));

  SpectralSample bare;
  bare.singular_values = {1.0};
  CHECK_THROWS_AS(delocalization_stats(bare, 1.0, 0.1), Error);
}

TEST_CASE("smallest singular value probe") {
  const SminProbe u = smallest_sv_probe(ones_spec(40, 1, false), {2.0, 0.0}, 5);
  for (double v : u.values) CHECK(v >= 1.0 - 1e-12);
  CHECK(u.tiny_count == 0);

  const ModelSpec fig = model_from_laws(Measure::uniform(0.5, 4.0), 200, 23);
  const SminProbe at0 = smallest_sv_probe(fig, {0.0, 0.0}, 2);
  for (double v : at0.values) CHECK(v == Approx(fig.T.front()).epsilon(1e-12));

  const SminProbe p = smallest_sv_probe(fig, {1.9, 0.0}, 100);
  REQUIRE(p.quantiles.size() == p.probabilities.size());
  CHECK(p.quantiles[4] > 1e-3);
  CHECK(p.quantiles.front() == *std::min_element(p.values.begin(), p.values.end()));
  CHECK(std::is_sorted(p.quantiles.begin(), p.quantiles.end()));
}

TEST_CASE("empirical quantiles") {
  CHECK(empirical_quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(empirical_quantile({1.0, 2.0}, 0.25) == 1.25);
  CHECK(empirical_quantile({1.0, 2.0}, 1.0) == 2.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), Error);
  CHECK_THROWS_AS(empirical_quantile({1.0}, 1.5), Error);
}

TEST_CASE("estimates do not depend on the worker count") {
  const ModelSpec spec = alternating_spec(30, 99);
  const UpperHalfPoint z{0.3, 0.8};
  EstimateOptions one, three;
  three.threads = 3;
  const SubordinationEstimate a = estimate_subordination(spec, z, 7, one);
  const SubordinationEstimate b = estimate_subordination(spec, z, 7, three);
  CHECK(a.m_H_emp == b.m_H_emp);
  CHECK(a.S_A_emp == b.S_A_emp);
  CHECK(a.resolvent_residual_A == b.resolvent_residual_A);
  CHECK(a.se_S_B == b.se_S_B);
  CHECK(schwinger_dyson_residual(spec, z, 5, one).residual ==
        schwinger_dyson_residual(spec, z, 5, three).residual);
  const SminProbe p1 = smallest_sv_probe(spec, {1.0, 0.0}, 4, 1);
  const SminProbe p3 = smallest_sv_probe(spec, {1.0, 0.0}, 4, 3);
  CHECK(p1.values == p3.values);
}

TEST_CASE("shifted singular values reproduce the limiting transform") {
  const Measure law = Measure::uniform(0.5, 4.0);
  const ModelSpec spec = model_from_laws(law, 400, 57);
  SampleRequest req;
  req.target = SvTarget::Shifted;
  req.z0 = {1.9, 0.0};
  req.eigenvalues = false;
  cplx acc = 0.0;
  for (int s = 0; s < 10; ++s) acc += resolvent_trace(sample_model(spec, req, s).singular_values, {0.0, 1.0});
  acc /= 10.0;
  CHECK(std::abs(acc - nu_infinity_m(law, 1.9, {0.0, 1.0})) <= 0.02);
}

TEST_CASE("sample CSV") {
  SpectralSample s;
  s.eigenvalues = {{1.0, -0.5}};
  s.singular_values = {2.0, 0.25};
  std::ostringstream os;
  write_sample_csv(s, os);
  CHECK(os.str() == "index,re_lambda,im_lambda,s\n0,1,-0.5,2\n1,,,0.25\n");
}
