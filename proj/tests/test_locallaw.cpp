#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ringlab/locallaw.hpp"
#include "ringlab/quadrature.hpp"

using namespace ringlab;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double semicircle_density(double x) { return x * x < 4.0 ? std::sqrt(4.0 - x * x) / (2.0 * kPi) : 0.0; }

double arcsine_density(double x) { return x * x < 4.0 ? 1.0 / (kPi * std::sqrt(4.0 - x * x)) : 0.0; }

// int phi(x) rho(x) dx with the substitution x = 2 sin(theta), which removes
// the edge singularities of both densities.
double direct_integral(const TestFunction& phi, double (*rho)(double)) {
  const double lo = std::asin(std::max(-1.0, phi.lo / 2.0));
  const double hi = std::asin(std::min(1.0, phi.hi / 2.0));
  const QuadratureRule r = composite_gauss_legendre(20, lo, hi, 400);
  double acc = 0.0;
  for (size_t i = 0; i < r.nodes.size(); ++i) {
    const double x = 2.0 * std::sin(r.nodes[i]);
    acc += r.weights[i] * phi(x) * rho(x) * 2.0 * std::cos(r.nodes[i]);
  }
  return acc;
}

TransformFn semicircle_m() {
  return [](cplx w) { return transform(Measure::semicircle(2.0), w); };
}

const RingLaw& uniform_ring() {
  static const RingLaw ring = [] {
    RingLawOptions o;
    o.grid_points = 81;
    return ring_law(Measure::uniform(0.5, 4.0), o);
  }();
  return ring;
}

}  // namespace

TEST_CASE("smoothstep matches the closed forms") {
  const Smoothstep s1(1), s2(2);
  for (double x : {0.1, 0.37, 0.5, 0.81}) {
    CHECK(s1(x) == Approx(3 * x * x - 2 * x * x * x).margin(1e-14));
    CHECK(s1(x, 1) == Approx(6 * x - 6 * x * x).margin(1e-14));
    CHECK(s2(x) == Approx(x * x * x * (10 - 15 * x + 6 * x * x)).margin(1e-14));
    CHECK(s2(x, 2) == Approx(60 * x - 180 * x * x + 120 * x * x * x).margin(1e-12));
  }
  CHECK(s1.sup_derivative(1) >= 1.5);
  CHECK(s1.sup_derivative(1) <= 1.5 + 1e-3);
  const Smoothstep s4(4);
  CHECK(s4(0.5) == Approx(0.5).margin(1e-14));
  for (int k = 1; k <= 4; ++k) {
    CHECK(std::abs(s4(1e-9, k)) < 1e-4);
    CHECK(std::abs(s4(1.0 - 1e-9, k)) < 1e-4);
  }
  CHECK(s4(-1.0) == 0.0);
  CHECK(s4(2.0) == 1.0);
  CHECK(s4(2.0, 1) == 0.0);
  CHECK_THROWS_AS(Smoothstep(0), Error);
}

TEST_CASE("smooth bumps vanish at the support ends and record sup bounds") {
  const TestFunction phi = smooth_bump(-1.0, -0.5, 0.5, 1.0, 3);
  REQUIRE(phi.sup_norms.size() == 5);
  // |phi^(l)(end +- h)| <= h sup |phi^(l+1)| when phi^(l) vanishes at the end.
  for (int l = 0; l <= 4; ++l) {
    double next = 0.0;
    for (int i = 0; i <= 10000; ++i) next = std::max(next, std::abs(phi(-1.0 + 0.5 * i / 10000, l + 1)));
    CHECK(std::abs(phi(-1.0 + 1e-3, l)) <= 1e-3 * next);
    CHECK(std::abs(phi(1.0 - 1e-3, l)) <= 1e-3 * next);
  }
  CHECK(phi(0.0) == 1.0);
  CHECK(phi(0.3, 2) == 0.0);
  CHECK(phi(1.5) == 0.0);
  CHECK(phi(-0.75) == Approx(0.5).margin(1e-14));
  // sup of phi' is sup S' / 0.5
  CHECK(phi.sup_norms[1] == Approx(Smoothstep(4).sup_derivative(1) / 0.5).epsilon(1e-3));
  CHECK(phi.sup_norms[1] == Approx(2.0 * 315.0 / 128.0).epsilon(1e-6));
  for (int l = 0; l <= 4; ++l) {
    double m = 0.0;
    for (int i = 0; i <= 10000; ++i) m = std::max(m, std::abs(phi(-1.0 + 2.0 * i / 10000, l)));
    CHECK(phi.sup_norms[l] >= m);
  }
  CHECK(phi.max_sup_norm() == phi.sup_norms[4]);
  CHECK_THROWS_AS(smooth_bump(0.0, -1.0, 1.0, 2.0, 3), Error);
  CHECK_THROWS_AS(smooth_bump(-1.0, -0.5, 0.5, 1.0, 0), Error);
}

TEST_CASE("window estimator recovers closed-form densities") {
  const TransformFn m = semicircle_m();
  const EsyWindow w = esy_window(m, m, 0.0, 0.01, 10.0);
  CHECK(w.estimate == Approx(1.0 / kPi).epsilon(0.05));
  const EsyWindow coarse = esy_window(m, m, 0.0, 0.02, 10.0);
  CHECK(std::abs(w.estimate - 1.0 / kPi) < std::abs(coarse.estimate - 1.0 / kPi));
  CHECK(w.bound_terms[0] > 0.0);
  CHECK(w.bound_terms[3] > 0.0);

  const TransformFn a = [](cplx z) { return transform(Measure::arcsine(2.0), z); };
  CHECK(esy_window(a, a, 1.0, 0.01, 10.0).estimate ==
        Approx(1.0 / (kPi * std::sqrt(3.0))).epsilon(0.05));

  const TransformFn d0 = [](cplx z) { return -1.0 / z; };
  CHECK(std::abs(esy_window(d0, d0, 5.0, 0.01, 10.0).estimate) < 1e-3);
  CHECK_THROWS_AS(esy_window(m, m, 0.0, 0.0, 10.0), Error);
  CHECK_THROWS_AS(esy_window(m, m, 0.0, 0.01, 1.0), Error);
}

TEST_CASE("Helffer-Sjostrand integration") {
  const TestFunction phi = smooth_bump(-1.0, -0.5, 0.5, 1.0, 3);
  const TransformFn d0 = [](cplx z) { return -1.0 / z; };
  const HsResult h0 = hs_integrate(phi, d0, 3, 1.0, 1e-3);
  CHECK(std::abs(h0.value - 1.0) <= h0.error_bound);

  const TransformFn sc = semicircle_m();
  const HsResult hs = hs_integrate(phi, sc, 3, 1.0, 1e-3);
  const double oracle = direct_integral(phi, semicircle_density);
  CHECK(std::abs(hs.value - oracle) <= 1e-3);
  CHECK(std::abs(hs.value - oracle) <= hs.error_bound);

  const TransformFn sum = [&](cplx z) { return d0(z) + sc(z); };
  CHECK(std::abs(hs_integrate(phi, sum, 3, 1.0, 1e-3).value - h0.value - hs.value) <= 1e-10);

  const TestFunction off = smooth_bump(0.5, 1.0, 1.5, 1.9, 3);
  const TransformFn as = [](cplx z) { return transform(Measure::arcsine(2.0), z); };
  const HsResult ha = hs_integrate(off, as, 3, 1.0, 1e-3);
  CHECK(std::abs(ha.value - direct_integral(off, arcsine_density)) <= ha.error_bound);

  CHECK_THROWS_AS(hs_integrate(phi, sc, 0, 1.0, 1e-3), Error);
  CHECK_THROWS_AS(hs_integrate(smooth_bump(-1.0, -0.5, 0.5, 1.0, 1), sc, 3, 1.0, 1e-3), Error);
}

TEST_CASE("cutoff logarithms") {
  const double t = 0.01, K = 2.0;
  const CutoffLogs c = cutoff_logs(t, K);
  for (double x : {0.004, 0.006, 0.008, 0.01, 0.5, 3.0, 6.0}) {
    CHECK(c.log_geq(x) + c.log_lt(x) == Approx(std::log(x)).margin(1e-15));
    const double v = c.phi(x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (double x : {0.01, 0.2, 1.0, 6.0}) CHECK(c.log_geq(x) == std::log(x));
  CHECK(c.log_geq(0.004) == 0.0);
  CHECK(c.phi.lo == t / 2);
  CHECK(c.phi.hi == 3 * K + 1);
  const int p = 3;
  CHECK(c.phi.sup_norms[1] <= 2.0 * (p + 1) / t);
  for (int l = 0; l <= p + 1; ++l) CHECK(c.phi.sup_norms[l] <= c.derivative_constants[l] * std::pow(t, -l) * (1 + 1e-9));
  CHECK_THROWS_AS(cutoff_logs(2.0, 2.0), Error);
  CHECK_THROWS_AS(c.log_geq(0.0), Error);
}

TEST_CASE("scales and the exponent constraint") {
  CHECK(srt_scale(1000) == Approx(std::pow(std::log(1000.0), -0.2)).epsilon(1e-14));
  CHECK(cutoff_scale(1000) == Approx(std::pow(std::log(1000.0), -0.45)).epsilon(1e-14));
  CHECK_FALSE(scale_constraint_holds(0.2, 0.05, 3));
  CHECK(scale_constraint_holds(0.05, 0.05, 3));
  CHECK(scale_constraint_holds(0.2, 0.05, 18));
}

TEST_CASE("report rows") {
  std::ostringstream os;
  write_report_header(os);
  LocalLawReport r;
  r.statistic = "local_sv";
  r.N = 10;
  r.scale = 0.05;
  r.empirical = 0.5;
  r.theoretical = 0.25;
  r.difference = r.empirical - r.theoretical;
  r.tolerance = 0.1;
  r.seeds = {3, 4};
  write_report_row(r, os);
  CHECK(os.str() ==
        "statistic,N,scale,empirical,theoretical,diff,tol,seed_list,pass\n"
        "local_sv,10,0.05,0.5,0.25,0.25,0.1,3;4,false\n");
}

TEST_CASE("ring bump integrals") {
  const RingLaw& ring = uniform_ring();
  RadialBump wide;
  wide.scale = 2.0;
  CHECK(ring_bump_integral(ring, {1.9, 0.0}, 0.25, wide) ==
        ring_bump_integral(ring, {1.9, 0.0}, 0.5, RadialBump{}));
  CHECK(ring_bump_integral(ring, {0.3, 0.0}, 0.5, RadialBump{}) == 0.0);

  // Mollified indicator of B(z0, R): ramp of width R/10 centred on the boundary.
  const double R = 0.3, w = R / 10;
  RadialBump ind;
  ind.scale = 1.0 + w / (2 * R);
  ind.width = w / (R + w / 2);
  const double mass = ring_ball_mass(ring, {1.9, 0.0}, R);
  CHECK(ring_bump_integral(ring, {1.9, 0.0}, R, ind) == Approx(mass).epsilon(0.02));

  RadialBump f;
  CHECK(f({0.2, 0.0}) == 1.0);
  CHECK(f({0.0, 0.75}) == Approx(0.5).margin(1e-14));
  CHECK(f({1.0, 0.0}) == 0.0);
}

TEST_CASE("local single ring statistic") {
  const RingLaw& ring = uniform_ring();
  const ModelSpec spec = model_from_laws(Measure::uniform(0.5, 4.0), 250, 31);
  std::vector<double> rel;
  for (int s = 0; s < 3; ++s) {
    const SpectralSample smp = sample_model(spec, {}, s);
    const LocalLawReport r = local_srt_statistic(smp, ring, {1.9, 0.0}, 0.5);
    CHECK(r.difference == r.empirical - r.theoretical);
    CHECK(r.statistic == "local_srt");
    CHECK(r.N == 250);
    rel.push_back(std::abs(r.difference) / r.theoretical);
  }
  std::sort(rel.begin(), rel.end());
  CHECK(rel[1] <= 0.25);

  const SpectralSample smp = sample_model(spec, {}, 0);
  const LocalLawReport out = local_srt_statistic(smp, ring, {6.0, 0.0}, 0.5, {}, false);
  CHECK(out.theoretical == 0.0);
  CHECK(out.empirical == 0.0);
  CHECK_THROWS_AS(local_srt_statistic(smp, ring, {6.0, 0.0}, 0.5), Error);
  CHECK_THROWS_AS(local_srt_statistic(smp, ring, {1.9, 0.0}, 0.0), Error);
}

TEST_CASE("local singular value statistic") {
  const Measure d1 = Measure::point(1.0);
  const ModelSpec spec = model_from_laws(d1, 250, 77, &d1);
  SampleRequest req;
  req.eigenvalues = false;
  const SpectralSample smp = sample_model(spec, req, 0);
  const LocalLawReport r = local_sv_statistic(smp.singular_values, d1, d1, 1.0, 0.05);
  CHECK(r.theoretical == Approx(2.0 / (kPi * std::sqrt(3.0))).epsilon(1e-6));
  CHECK(std::abs(r.difference) <= 0.2 * r.theoretical);
  CHECK(r.difference == r.empirical - r.theoretical);
  // 2 N^(-1/8) > 0.2 for every N below 10^8.
  CHECK_FALSE(r.in_window);
  CHECK_FALSE(local_sv_statistic(smp.singular_values, d1, d1, 1.0, 0.2).in_window);

  const LocalLawReport far = local_sv_statistic(smp.singular_values, d1, d1, 10.0, 0.05);
  CHECK(far.empirical == 0.0);
  CHECK(far.theoretical == Approx(0.0).margin(1e-6));
  CHECK_THROWS_AS(local_sv_statistic(smp.singular_values, d1, d1, 1.0, 0.0), Error);
}

TEST_CASE("Hadamard three circles check") {
  const HadamardReport zero = hadamard_check([](cplx) { return cplx(0.0); }, 1.0, 0.0, 0.0);
  CHECK(zero.holds);
  CHECK(zero.inner_max == 0.0);

  std::mt19937_64 rng(11);
  const Eigen::VectorXd ev = goe_eigenvalues(400, rng);
  const Measure sc = Measure::semicircle(2.0);
  const TransformFn diff = [&](cplx w) {
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += 1.0 / (ev(i) - w);
    return s / static_cast<double>(ev.size()) - transform(sc, w);
  };
  double delta = 0.0;
  for (int k = 0; k < 64; ++k) {
    const cplx u = std::polar(1.0, 2 * kPi * k / 64);
    delta = std::max(delta, std::abs(diff(cplx(0.0, 1.0) * (std::numbers::e + u) / (std::numbers::e - u))));
  }
  const HadamardReport h = hadamard_check(diff, 1.0, delta * (1 + 1e-12), 2.0);
  CHECK(h.holds);
  CHECK(h.inner_max <= h.inner_bound);
  CHECK(h.c == 4.0);
  CHECK(h.r == Approx(std::exp(-4.0 * std::sqrt(4.0 / -std::log(delta)))).epsilon(1e-12));
  CHECK(h.center.imag() == Approx((1 + h.r * h.r) / (1 - h.r * h.r)).epsilon(1e-12));

  CHECK_THROWS_AS(hadamard_check(diff, 1.0, delta / 2, 2.0), Error);
  CHECK_THROWS_AS(hadamard_check([](cplx) { return cplx(0.5); }, 1.0, 0.6, 2.0), Error);
}
