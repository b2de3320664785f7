#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ringlab/measures.hpp"

using namespace ringlab;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Measure> sample_laws() {
  return {Measure::semicircle(2.0), Measure::arcsine(2.0), Measure::uniform(0.5, 4.0),
          Measure::uniform(-1.0, 1.0), Measure::symmetric_bernoulli(1.0),
          symmetrize(Measure::uniform(0.5, 4.0))};
}

}  // namespace

TEST_CASE("point mass at zero") {
  const cplx m = stieltjes(Measure::point(0.0), {0.0, 1.0});
  CHECK(std::abs(m - cplx(0.0, 1.0)) < 1e-15);
}

TEST_CASE("arcsine closed form at 3i") {
  const cplx m = stieltjes(Measure::arcsine(2.0), {0.0, 3.0});
  CHECK(std::abs(m - cplx(0.0, 1.0 / std::sqrt(13.0))) < 1e-14);
}

TEST_CASE("uniform on the imaginary axis matches arctan") {
  for (double y : {0.1, 0.5, 2.0, 10.0}) {
    const cplx m = stieltjes(Measure::uniform(-1.0, 1.0), {0.0, y});
    CHECK(std::abs(m.real()) < 1e-14);
    CHECK(m.imag() == Approx(std::atan(1.0 / y)).epsilon(1e-13));
  }
}

TEST_CASE("semicircle transform solves its quadratic") {
  const Measure sc = Measure::semicircle(2.0);
  for (double E : {-3.0, -1.0, 0.0, 0.7, 2.5})
    for (double eta : {0.01, 0.3, 2.0}) {
      const cplx z(E, eta), m = stieltjes(sc, {E, eta});
      CHECK(std::abs(m * m + z * m + 1.0) < 1e-13);
      CHECK(m.imag() > 0.0);
    }
}

TEST_CASE("closed form and discretization agree") {
  for (const auto& mu : sample_laws()) {
    for (double E : {-3.0, -1.5, 0.0, 0.8, 2.1, 4.5})
      for (double eta : {0.1, 0.5, 1.0})
        for (int k = 0; k <= 2; ++k) {
          const cplx a = transform(mu, {E, eta}, k), b = discrete_transform(mu, {E, eta}, k);
          CHECK(std::abs(a - b) < 1e-6);
        }
  }
}

TEST_CASE("derivatives match finite differences") {
  const double h = 1e-4;
  for (const auto& mu : sample_laws()) {
    for (cplx z : {cplx(0.3, 0.7), cplx(-2.5, 0.2), cplx(3.0, 1.5)}) {
      const cplx d1 = (transform(mu, z + h) - transform(mu, z - h)) / (2.0 * h);
      const cplx d2 =
          (transform(mu, z + h) - 2.0 * transform(mu, z) + transform(mu, z - h)) / (h * h);
      CHECK(std::abs(transform(mu, z, 1) - d1) < 1e-6 * (1.0 + std::abs(d1)));
      CHECK(std::abs(transform(mu, z, 2) - d2) < 1e-4 * (1.0 + std::abs(d2)));
    }
  }
}

TEST_CASE("Herglotz property and the 1/eta bound") {
  for (const auto& mu : sample_laws())
    for (double E = -5.0; E <= 5.0; E += 0.25)
      for (double eta : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
        const cplx m = stieltjes(mu, {E, eta});
        CHECK(m.imag() >= 0.0);
        CHECK(std::abs(m) <= mu.total_mass() / eta * (1.0 + 1e-12));
      }
}

TEST_CASE("density bound of uniform(0.5,4)") {
  const Measure mu = Measure::uniform(0.5, 4.0);
  double sup = 0.0;
  for (double E = -1.0; E <= 5.5; E += 0.01)
    for (double eta : {1e-6, 1e-4, 1e-2, 1.0}) sup = std::max(sup, stieltjes(mu, {E, eta}).imag());
  CHECK(sup <= kPi / 3.5 * (1.0 + 1e-6));
  CHECK(sup > 0.99 * kPi / 3.5);
}

TEST_CASE("discretized moments match closed forms") {
  for (const auto& mu : sample_laws()) {
    REQUIRE(mu.law().has_value());
    for (int k = 0; k <= 4; ++k) CHECK(moment(mu, k) == Approx(named_moment(*mu.law(), k)).margin(1e-8));
  }
  CHECK(named_moment(*Measure::semicircle(2.0).law(), 2) == 1.0);
  CHECK(named_moment(*Measure::semicircle(2.0).law(), 4) == 2.0);
  CHECK(named_moment(*Measure::arcsine(2.0).law(), 4) == 6.0);
}

TEST_CASE("moments of uniform(0.5,4)") {
  const Measure mu = Measure::uniform(0.5, 4.0);
  CHECK(moment(mu, 2) == Approx((64.0 - 0.125) / 10.5).epsilon(1e-12));
  CHECK(moment(mu, -2, true) == Approx(0.5).epsilon(1e-12));
  CHECK(moment(mu, -1, true) == Approx(std::log(8.0) / 3.5).epsilon(1e-12));
  const Measure s = symmetrize(mu);
  CHECK(moment(s, 1) == Approx(0.0).margin(1e-14));
  CHECK(moment(s, 2) == Approx(moment(mu, 2)).epsilon(1e-13));
}

TEST_CASE("negative moments refuse singular supports") {
  CHECK_THROWS_AS(moment(Measure::semicircle(2.0), -2, true), Error);
  try {
    moment(Measure::semicircle(2.0), -2, true);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMoment);
  }
  try {
    moment(Measure::point(0.0), -1, true);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMoment);
  }
  CHECK_THROWS_AS(moment(Measure::uniform(0.5, 4.0), -2, false), Error);
}

TEST_CASE("empirical measure merges equal values") {
  const std::vector<double> v{1.0, 1.0, 3.0};
  const Measure e = empirical_measure(v);
  REQUIRE(e.atoms().size() == 2);
  CHECK(e.atoms()[0].location == 1.0);
  CHECK(e.atoms()[0].weight == Approx(2.0 / 3.0));
  CHECK(e.atoms()[1].location == 3.0);
  CHECK(e.atoms()[1].weight == Approx(1.0 / 3.0));
}

TEST_CASE("symmetrization") {
  for (const auto& mu : sample_laws()) {
    const Measure s = symmetrize(mu);
    CHECK(symmetrize(s) == s);
    CHECK(s.is_symmetric());
    CHECK(s.total_mass() == Approx(mu.total_mass()).epsilon(1e-14));
    for (cplx z : {cplx(0.4, 0.3), cplx(-1.7, 0.05), cplx(2.2, 2.0)}) {
      const cplx a = transform(s, z), b = transform(s, -std::conj(z));
      CHECK(std::abs(b + std::conj(a)) < 1e-13);
      const cplx da = discrete_transform(s, z), db = discrete_transform(s, -std::conj(z));
      CHECK(std::abs(db + std::conj(da)) < 1e-12);
    }
  }
  CHECK(symmetrize(Measure::semicircle(2.0)) == Measure::semicircle(2.0));
  const Measure b = symmetrize(Measure::point(1.0));
  REQUIRE(b.atoms().size() == 2);
  CHECK(b.atoms()[0].weight == 0.5);
  CHECK(std::abs(transform(b, {0.0, 1.0}) - transform(Measure::symmetric_bernoulli(1.0), {0.0, 1.0})) < 1e-15);
}

TEST_CASE("serialization round trip is exact") {
  std::vector<Measure> all = sample_laws();
  all.push_back(Measure::from_atoms({{0.1, 0.3}, {1.0 / 3.0, 0.7}}));
  all.push_back(Measure::combine(Measure::uniform(0.5, 4.0), 0.5, Measure::point(1.0), -0.25));
  for (const auto& mu : all) {
    const std::string text = serialize(mu);
    const Measure back = deserialize(text);
    CHECK(back == mu);
    CHECK(serialize(back) == text);
  }
  CHECK_THROWS_AS(deserialize("{\"atoms\": 3}"), Error);
}

TEST_CASE("density extrapolation") {
  const DensityEstimate sc = density_at(Measure::semicircle(2.0), 0.0);
  CHECK(sc.density == Approx(1.0 / kPi).margin(1e-4));
  const DensityEstimate gap = density_at(Measure::point(1.0), 2.0);
  CHECK(std::abs(gap.density) < 1e-6);
  const DensityEstimate u = density_at(Measure::uniform(0.5, 4.0), 2.0);
  CHECK(u.density == Approx(1.0 / 3.5).margin(1e-6));
  const std::vector<double> bad{0.1, 0.2, 0.05};
  CHECK_THROWS_AS(density_at([](cplx w) { return -1.0 / w; }, 0.0, bad), Error);
}

TEST_CASE("domain errors") {
  try {
    stieltjes(Measure::semicircle(2.0), {0.5, 0.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  CHECK_THROWS_AS(parse_law("gaussian(1)"), Error);
  CHECK_THROWS_AS(parse_law("uniform(4,1)"), Error);
  CHECK(parse_law("uniform(0.5,4)") == Measure::uniform(0.5, 4.0));
  CHECK(parse_law("atoms(1:0.5,3:0.5)").atoms().size() == 2);
}
