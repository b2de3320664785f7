#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ringlab/freeconv.hpp"

using namespace ringlab;
using Catch::Approx;

namespace {

// Semicircle of variance v: v m^2 + z m + 1 = 0, root in C+.
cplx semicircle_oracle(double variance, cplx z) {
  const cplx d = std::sqrt(z * z - 4.0 * variance);
  cplx m = (-z + d) / (2.0 * variance);
  if (m.imag() < 0.0) m = (-z - d) / (2.0 * variance);
  return m;
}

cplx arcsine_oracle(double h, cplx z) {
  cplx s = std::sqrt(z * z - h * h);
  cplx m = -1.0 / s;
  if (m.imag() < 0.0) m = -m;
  return m;
}

SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-13;
  return o;
}

}  // namespace

TEST_CASE("bernoulli plus bernoulli is arcsine") {
  const Measure b = Measure::symmetric_bernoulli(1.0);
  for (double E = -3.0; E <= 3.0; E += 0.5)
    for (double eta : {0.1, 0.5, 1.0}) {
      const cplx m = free_convolve_m(b, b, {E, eta}, tight());
      CHECK(std::abs(m - arcsine_oracle(2.0, {E, eta})) < 1e-8);
    }
}

TEST_CASE("semicircle plus semicircle is semicircle") {
  const Measure a = Measure::semicircle(2.0), b = Measure::semicircle(1.0);
  for (double E = -3.0; E <= 3.0; E += 0.5)
    for (double eta : {0.1, 0.5, 1.0}) {
      const cplx m = free_convolve_m(a, b, {E, eta}, tight());
      CHECK(std::abs(m - semicircle_oracle(1.25, {E, eta})) < 1e-8);
    }
}

TEST_CASE("small eta semicircle sums") {
  const Measure a = Measure::semicircle(2.0);
  for (double E : {-1.5, 0.0, 0.9, 2.5})
    for (int k = 0; k <= 8; ++k) {
      const double eta = std::pow(10.0, -k);
      const auto sol = solve_subordination(a, a, {E, eta}, tight());
      const auto diag = diagnostics_at(a, a, {E, eta}, sol);
      CHECK(std::abs(sol.m - semicircle_oracle(2.0, {E, eta})) < 1e-8 * (1.0 + diag.alpha));
    }
}

TEST_CASE("translation by a point mass") {
  const Measure mu = Measure::uniform(0.5, 4.0);
  for (double c : {-1.0, 0.0, 0.75})
    for (cplx z : {cplx(0.3, 0.2), cplx(2.0, 1.0), cplx(-4.0, 0.05)}) {
      const cplx m = free_convolve_m(mu, Measure::point(c), UpperHalfPoint::from(z));
      CHECK(std::abs(m - transform(mu, z - c)) < 1e-10);
      const cplx m2 = free_convolve_m(Measure::point(c), mu, UpperHalfPoint::from(z));
      CHECK(std::abs(m2 - transform(mu, z - c)) < 1e-10);
    }
}

TEST_CASE("output is a Stieltjes transform and symmetric inputs stay symmetric") {
  const Measure u = symmetrize(Measure::uniform(0.5, 4.0));
  const Measure b = Measure::symmetric_bernoulli(1.5);
  for (double E : {-4.0, -1.0, 0.3, 2.0})
    for (double eta : {0.01, 0.2, 3.0}) {
      const cplx m = free_convolve_m(u, b, {E, eta}, tight());
      CHECK(m.imag() > 0.0);
      CHECK(std::abs(m) <= 1.0 / eta * (1.0 + 1e-9));
      const cplx mr = free_convolve_m(u, b, {-E, eta}, tight());
      CHECK(std::abs(mr + std::conj(m)) < 1e-9);
    }
}

TEST_CASE("density bound is preserved") {
  const Measure mu = Measure::uniform(-1.0, 1.0);
  for (const Measure& nu : {Measure::symmetric_bernoulli(1.0), Measure::semicircle(2.0),
                            symmetrize(Measure::uniform(0.5, 4.0))}) {
    double sup = 0.0;
    for (double E = -4.0; E <= 4.0; E += 0.25)
      for (double eta : {1e-3, 1e-2, 0.1, 1.0})
        sup = std::max(sup, free_convolve_m(mu, nu, {E, eta}).imag());
    CHECK(sup <= std::numbers::pi / 2.0 + 1e-6);
  }
}

TEST_CASE("variances add") {
  const Measure a = Measure::symmetric_bernoulli(1.0), b = symmetrize(Measure::uniform(0.5, 4.0));
  // g(Y) = -(m(iY) + 1/(iY)) (iY)^3 = m2 + m4 / (iY)^2 + ...
  std::vector<double> Y{40.0, 60.0, 90.0}, g;
  for (double y : Y) {
    const cplx z(0.0, y);
    const cplx m = free_convolve_m(a, b, {0.0, y}, tight());
    g.push_back((-(m + 1.0 / z) * z * z * z).real());
  }
  // Quadratic fit in 1/Y^2 through the three points, evaluated at 0.
  std::vector<double> x;
  for (double y : Y) x.push_back(1.0 / (y * y));
  double v = 0.0;
  for (int i = 0; i < 3; ++i) {
    double l = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) l *= (0.0 - x[j]) / (x[i] - x[j]);
    v += l * g[i];
  }
  CHECK(v == Approx(moment(a, 2) + moment(b, 2)).margin(1e-4));
}

TEST_CASE("subordination residuals meet tolerance") {
  const Measure a = Measure::semicircle(2.0), b = symmetrize(Measure::uniform(0.5, 4.0));
  for (double eta : {1e-3, 0.05, 1.0}) {
    const auto r = solve_subordination(a, b, {0.7, eta});
    for (double res : r.residuals) CHECK(res <= 1e-10);
    CHECK(std::abs(r.m - transform(b, cplx(0.7, eta) + r.S_mu)) < 1e-9);
    CHECK(std::abs(r.m + 1.0 / (cplx(0.7, eta) + r.S_mu + r.S_nu)) < 1e-9);
    CHECK((cplx(0.7, eta) + r.S_nu).imag() >= eta * (1 - 1e-9));
  }
}

TEST_CASE("warm start reproduces the cold solution") {
  const Measure a = Measure::symmetric_bernoulli(1.0), b = symmetrize(Measure::uniform(0.5, 4.0));
  const auto cold = solve_subordination(a, b, {0.4, 0.30}, tight());
  const auto near = solve_subordination(a, b, {0.41, 0.29}, tight());
  const auto warm = solve_subordination(a, b, {0.4, 0.30}, tight(), &near);
  CHECK(std::abs(warm.m - cold.m) < 1e-11);
}

TEST_CASE("Newton-Kantorovich on scalar quadratics") {
  VectorFn F = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) - 2.0); };
  JacobianFn J = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
  const auto r = newton_kantorovich(F, J, Eigen::VectorXd::Constant(1, 2.0), 0.5);
  REQUIRE(r.certificate.has_value());
  CHECK(r.converged);
  CHECK(r.root(0) == Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(r.certificate->r_star >= std::abs(2.0 - std::sqrt(2.0)) - 1e-12);
  CHECK(std::abs(r.root(0) - 2.0) <= r.certificate->r_star + 1e-12);

  VectorFn G = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) - 1.0); };
  const auto g = newton_kantorovich(G, J, Eigen::VectorXd::Constant(1, 0.01), 100.0);
  CHECK_FALSE(g.certificate.has_value());
  CHECK_FALSE(g.converged);

  try {
    newton_kantorovich(G, J, Eigen::VectorXd::Constant(1, 0.0), 1.0);
    FAIL("expected a singular Jacobian error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
  }
}

TEST_CASE("Lipschitz stencil on a quadratic map") {
  // F(x) = x^2 - 2 has F' = 2x, so the scaled Lipschitz constant at x0 is 1/x0.
  JacobianFn J = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
  CHECK(estimate_lipschitz(J, Eigen::VectorXd::Constant(1, 2.0), 0.1) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Kantorovich certificate on the subordination system is sound") {
  const Measure b = Measure::symmetric_bernoulli(1.0);
  const cplx z(0.5, 0.5);
  // Independent construction of the system in real coordinates.
  auto Fc = [&](cplx s1, cplx s2) {
    const cplx q = 1.0 / (z + s1 + s2);
    return std::array<cplx, 2>{transform(b, z + s2) + q, transform(b, z + s1) + q};
  };
  VectorFn F = [&](const Eigen::VectorXd& x) {
    auto f = Fc({x(0), x(1)}, {x(2), x(3)});
    Eigen::VectorXd out(4);
    out << f[0].real(), f[0].imag(), f[1].real(), f[1].imag();
    return out;
  };
  JacobianFn J = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd out(4, 4);
    const double h = 1e-7;
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
      e(k) = h;
      out.col(k) = (F(x + e) - F(x - e)) / (2 * h);
    }
    return out;
  };
  const auto exact = solve_subordination(b, b, UpperHalfPoint::from(z), tight());
  Eigen::VectorXd x0(4);
  x0 << exact.S_mu.real() + 2e-5, exact.S_mu.imag() - 1e-5, exact.S_nu.real() - 1e-5,
      exact.S_nu.imag() + 2e-5;
  const double b0 = J(x0).colPivHouseholderQr().solve(F(x0)).norm();
  const double L = 100.0 * estimate_lipschitz(J, x0, 2.0 * b0);
  const auto nk = newton_kantorovich(F, J, x0, L);
  REQUIRE(nk.certificate.has_value());
  Eigen::VectorXd xs(4);
  xs << exact.S_mu.real(), exact.S_mu.imag(), exact.S_nu.real(), exact.S_nu.imag();
  CHECK((xs - x0).norm() <= nk.certificate->r_star);
  CHECK((nk.root - xs).norm() < 1e-8);
}

TEST_CASE("kappa against closed forms") {
  // nu = delta_0 gives S_nu = 0, S_mu = -z - 1/m_mu(z) and kappa = m_mu(z)^4.
  const Measure sc = Measure::semicircle(2.0);
  const cplx z(0.0, 2.0);
  const auto sol = solve_subordination(sc, Measure::point(0.0), UpperHalfPoint::from(z), tight());
  CHECK(std::abs(sol.S_nu) < 1e-12);
  const cplx m = transform(sc, z);
  CHECK(std::abs(sol.S_mu - (-z - 1.0 / m)) < 1e-12);
  const auto d = diagnostics(sc, Measure::point(0.0), UpperHalfPoint::from(z), tight());
  CHECK(std::abs(d.kappa - std::pow(m, 4)) < 1e-12);

  // bernoulli [+] bernoulli: S_mu = S_nu = (-1/m - z) / 2 with m the arcsine transform.
  const Measure b = Measure::symmetric_bernoulli(1.0);
  const cplx ma = arcsine_oracle(2.0, z);
  const cplx S = (-1.0 / ma - z) / 2.0;
  const cplx w = z + S, q = ma * -1.0;
  auto mb1 = [](cplx x) { return 0.5 * (1.0 / ((1.0 - x) * (1.0 - x)) + 1.0 / ((1.0 + x) * (1.0 + x))); };
  auto mb2 = [](cplx x) { return 1.0 / std::pow(1.0 - x, 3) + 1.0 / std::pow(-1.0 - x, 3); };
  const cplx kappa = 2.0 * mb1(w) * q * q - mb1(w) * mb1(w);
  const auto db = diagnostics(b, b, UpperHalfPoint::from(z), tight());
  CHECK(std::abs(db.kappa - kappa) < 1e-10);
  CHECK(db.alpha == Approx((std::norm(q) + 2.0 * std::abs(mb1(w))) / std::abs(kappa)).epsilon(1e-9));
  CHECK(db.beta == Approx(std::pow(std::abs(q), 3) + 2.0 * std::abs(mb2(w))).epsilon(1e-9));
}

TEST_CASE("kappa is bounded below far from the axis") {
  const std::vector<Measure> laws{Measure::semicircle(2.0), Measure::arcsine(2.0),
                                  Measure::uniform(-2.0, 2.0), Measure::symmetric_bernoulli(2.0),
                                  Measure::uniform(0.5, 2.0)};
  const cplx z(0.0, 100.0);
  for (const auto& a : laws)
    for (const auto& b : laws) {
      const auto d = diagnostics(a, b, UpperHalfPoint::from(z), tight());
      CHECK(std::abs(d.kappa) >= 0.5 / std::pow(std::abs(z), 4));
      CHECK(std::isfinite(d.alpha));
      CHECK(std::isfinite(d.beta));
    }
}

TEST_CASE("solver rejects points off the upper half-plane") {
  CHECK_THROWS_AS(UpperHalfPoint(0.0, -1.0), Error);
}
