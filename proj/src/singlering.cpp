#include "ringlab/singlering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "ringlab/quadrature.hpp"

namespace ringlab {

namespace {

constexpr double kPi = std::numbers::pi;

SolverOptions path_options() {
  SolverOptions o;
  o.tol = 1e-13;
  return o;
}

// Solves along a path of nearby points, warm-starting each solve from a
// linear prediction through the two previous solutions.
class PathSolver {
 public:
  PathSolver(const Measure& a, const Measure& b) : a_(a), b_(b), opt_(path_options()) {}

  cplx m(cplx z) {
    SubordinationResult guess;
    const SubordinationResult* warm = nullptr;
    if (prev_) {
      guess = *prev_;
      if (prev2_ && z1_ != z2_) {
        const cplx t = (z - z1_) / (z1_ - z2_);
        guess.S_mu += t * (prev_->S_mu - prev2_->S_mu);
        guess.S_nu += t * (prev_->S_nu - prev2_->S_nu);
      }
      warm = &guess;
    }
    SubordinationResult r;
    try {
      r = solve_subordination(a_, b_, UpperHalfPoint::from(z), opt_, warm);
    } catch (const Error& e) {
      // Near a degenerate point (kappa ~ 0) the tight tolerance can stall.
      if (e.code() != ErrorCode::NonConvergence) throw;
      SolverOptions loose;
      loose.max_iter = 100000;
      r = solve_subordination(a_, b_, UpperHalfPoint::from(z), loose, warm);
    }
    prev2_ = prev_;
    z2_ = z1_;
    prev_ = r;
    z1_ = z;
    return r.m;
  }

  void reset() {
    prev_.reset();
    prev2_.reset();
  }

 private:
  const Measure& a_;
  const Measure& b_;
  SolverOptions opt_;
  std::optional<SubordinationResult> prev_, prev2_;
  cplx z1_, z2_;
};

// Integral of log|x| against a symmetric measure with no continuous part near
// zero issues: direct sum over the stored discretization.
double direct_log_integral(const Measure& mu) {
  double acc = 0.0;
  for (const auto& at : mu.atoms()) {
    if (at.weight == 0.0) continue;
    require(at.location != 0.0, ErrorCode::SingularMoment, "log-potential of an atom at 0");
    acc += at.weight * std::log(std::abs(at.location));
  }
  return acc;
}

double axis_route(const Measure& nu_s, double r) {
  if (r == 0.0 && nu_s.segments().empty()) return direct_log_integral(nu_s);
  const Measure bern = Measure::symmetric_bernoulli(r);
  PathSolver path(nu_s, bern);
  const double y0 = 1e-8, Y = 1e6;
  const double u0 = std::log(y0), u1 = std::log(Y);
  const int panels = static_cast<int>(std::ceil((u1 - u0) / 2.0));
  const double width = (u1 - u0) / panels;
  const auto& g = gauss_legendre(16);
  double acc = 0.0;
  double last_im = 0.0;
  bool gap = false;
  for (int p = panels - 1; p >= 0 && !gap; --p) {
    const double lo = u0 + p * width, half = 0.5 * width, mid = lo + half;
    double first_slope = 0.0, slope = 0.0;
    for (size_t k = g.nodes.size(); k-- > 0;) {
      const double y = std::exp(mid + half * g.nodes[k]);
      last_im = path.m(cplx(0.0, y)).imag();
      acc += half * g.weights[k] * y * (1.0 / (1.0 + y) - last_im);
      slope = last_im / y;
      if (k + 1 == g.nodes.size()) first_slope = slope;
    }
    // In a gap around 0, Im m(iy) = c y + O(y^3); finish analytically.
    const double y_lo = std::exp(lo);
    if (y_lo < 1e-3 && std::abs(slope - first_slope) <= 1e-3 * std::abs(slope)) {
      acc += std::log1p(y_lo) - 0.5 * slope * y_lo * y_lo;
      gap = true;
    }
  }
  if (!gap) acc += y0 * (1.0 - last_im);
  const double m2 = moment(nu_s, 2) + r * r;
  acc += -std::log1p(1.0 / Y) + m2 / (2.0 * Y * Y);
  return acc;
}

double laplacian(const Measure& nu_s, double r, double h) {
  auto lap = [&](double step) {
    const double lp = axis_route(nu_s, r + step), l0 = axis_route(nu_s, r),
                 lm = axis_route(nu_s, r - step);
    const double d2 = (lp - 2.0 * l0 + lm) / (step * step);
    const double d1 = (lp - lm) / (2.0 * step);
    return d2 + d1 / r;
  };
  const double coarse = lap(h), fine = lap(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

// Rectangle contour t -> t+iH -> X+iH -> X for int log(w) m(w) dw with n-point
// panels.
cplx contour_integral(const Measure& nu_s, const Measure& bern, double t, double X, double H,
                      int n) {
  PathSolver path(nu_s, bern);
  auto f = [&](cplx w) { return std::log(w) * path.m(w); };
  cplx total = 0.0;

  // Left leg, descending from t + iH towards the real axis, in log y.
  const double ymin = 1e-10;
  {
    const double u0 = std::log(ymin), u1 = std::log(H);
    const int panels = static_cast<int>(std::ceil((u1 - u0) / 2.0));
    const QuadratureRule rule = composite_gauss_legendre(n, u0, u1, panels);
    cplx acc = 0.0;
    for (size_t k = rule.nodes.size(); k-- > 0;) {
      const double y = std::exp(rule.nodes[k]);
      acc += rule.weights[k] * y * f(cplx(t, y));
    }
    acc += ymin * f(cplx(t, ymin));
    total += cplx(0.0, 1.0) * acc;
  }
  // Top leg.
  path.reset();
  {
    const int panels = std::max(1, static_cast<int>(std::ceil((X - t) / H)));
    const QuadratureRule rule = composite_gauss_legendre(n, t, X, panels);
    cplx acc = 0.0;
    for (size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(cplx(rule.nodes[k], H));
    total += acc;
  }
  // Right leg, descending from X + iH. X lies outside the support.
  path.reset();
  {
    const QuadratureRule rule = composite_gauss_legendre(n, 0.0, H, 2);
    cplx acc = 0.0;
    for (size_t k = rule.nodes.size(); k-- > 0;) acc += rule.weights[k] * f(cplx(X, rule.nodes[k]));
    total -= cplx(0.0, 1.0) * acc;
  }
  return total;
}

}  // namespace

AnnulusBounds annulus_bounds(const Measure& nu) {
  require(nu.total_mass() > 0.0 && nu.positive(), ErrorCode::InvalidArgument,
          "annulus bounds need a positive measure");
  require(nu.support_lo() >= 0.0, ErrorCode::Domain, "annulus bounds need a measure on [0, inf)");
  AnnulusBounds out;
  out.b = std::sqrt(moment(nu, 2));
  try {
    out.a = 1.0 / std::sqrt(moment(nu, -2, true));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMoment) throw;
    out.a = 0.0;
  }
  return out;
}

cplx nu_infinity_m(const Measure& nu, double r, UpperHalfPoint w) {
  require(r >= 0.0 && std::isfinite(r), ErrorCode::Domain, "radius must be finite and >= 0");
  return solve_subordination(symmetrize(nu), Measure::symmetric_bernoulli(r), w).m;
}

double density_bound_estimate(const Measure& nu) {
  const Measure s = symmetrize(nu);
  const double R = s.support_radius() + 0.5;
  double sup = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double E = -R + 2.0 * R * i / 400.0;
    sup = std::max(sup, transform(s, cplx(E, 1e-3)).imag() / kPi);
  }
  return sup;
}

LogPotential log_potential(const Measure& nu, double r, double t_cut) {
  require(t_cut > 0.0 && t_cut <= 0.1, ErrorCode::InvalidArgument, "t_cut must lie in (0, 0.1]");
  require(r >= 0.0 && std::isfinite(r), ErrorCode::Domain, "radius must be finite and >= 0");
  const Measure nu_s = symmetrize(nu);
  if (r == 0.0 && nu_s.segments().empty()) return {direct_log_integral(nu_s), 0.0};
  const Measure bern = Measure::symmetric_bernoulli(r);
  const double K = std::max({nu_s.support_radius(), r, 1.0});
  const double X = 3.0 * K, H = 1.0;

  const double fine = 2.0 / kPi * contour_integral(nu_s, bern, t_cut, X, H, 16).imag();
  const double coarse = 2.0 / kPi * contour_integral(nu_s, bern, t_cut, X, H, 10).imag();

  PathSolver path(nu_s, bern);
  const auto schedule = default_eta_schedule();
  std::vector<double> descending(schedule.begin(), schedule.end());
  const DensityEstimate rho = density_at([&](cplx w) { return path.m(w); }, t_cut, descending);
  require(std::isfinite(rho.density), ErrorCode::NonConvergence,
          "density recovery failed at t_cut");
  const double small_factor = t_cut * (1.0 - std::log(t_cut));
  LogPotential out;
  out.value = fine - 2.0 * rho.density * small_factor;
  const double M = density_bound_estimate(nu);
  out.error_bound = kPi * M * small_factor + std::abs(fine - coarse) +
                    2.0 * rho.error_estimate * small_factor;
  return out;
}

double log_potential_axis(const Measure& nu, double r) {
  require(r >= 0.0 && std::isfinite(r), ErrorCode::Domain, "radius must be finite and >= 0");
  return axis_route(symmetrize(nu), r);
}

double ring_density_unchecked(const Measure& nu, double r, double h) {
  require(h > 0.0 && r > h, ErrorCode::InvalidArgument, "need 0 < h < r");
  return laplacian(symmetrize(nu), r, h) / (2.0 * kPi);
}

double ring_density(const Measure& nu, double r, double h) {
  const AnnulusBounds ab = annulus_bounds(nu);
  const double slack = 1e-12 * (1.0 + ab.b);
  if (!(r >= ab.a + 2.0 * h - slack && r <= ab.b - 2.0 * h + slack)) {
    std::ostringstream os;
    os << "r = " << r << " is outside the interior of the annulus [" << ab.a << ", " << ab.b
       << "] shrunk by 2h";
    fail(ErrorCode::OutOfSupport, os.str());
  }
  return ring_density_unchecked(nu, r, h);
}

double RingLaw::density_at_radius(double r) const {
  if (r_grid.empty() || r < a || r > b) return 0.0;
  if (r <= r_grid.front()) {
    const double t = r_grid.front() > a ? (r - a) / (r_grid.front() - a) : 1.0;
    return edge_density_a + t * (density.front() - edge_density_a);
  }
  if (r >= r_grid.back()) {
    const double t = b > r_grid.back() ? (b - r) / (b - r_grid.back()) : 1.0;
    return edge_density_b + t * (density.back() - edge_density_b);
  }
  const auto it = std::upper_bound(r_grid.begin(), r_grid.end(), r);
  const size_t i = static_cast<size_t>(it - r_grid.begin()) - 1;
  const double t = (r - r_grid[i]) / (r_grid[i + 1] - r_grid[i]);
  return density[i] + t * (density[i + 1] - density[i]);
}

double RingLaw::total_mass() const {
  if (r_grid.empty()) return 0.0;
  auto g = [&](double r, double rho) { return 2.0 * kPi * r * rho; };
  double acc = 0.0;
  for (size_t i = 0; i + 1 < r_grid.size(); ++i)
    acc += 0.5 * (r_grid[i + 1] - r_grid[i]) * (g(r_grid[i], density[i]) + g(r_grid[i + 1], density[i + 1]));
  acc += 0.5 * (r_grid.front() - a) * (g(a, edge_density_a) + g(r_grid.front(), density.front()));
  acc += 0.5 * (b - r_grid.back()) * (g(r_grid.back(), density.back()) + g(b, edge_density_b));
  return acc;
}

RingLaw ring_law(const Measure& nu, const RingLawOptions& opt) {
  require(opt.grid_points >= 3, ErrorCode::InvalidArgument, "ring grid needs at least 3 points");
  const AnnulusBounds ab = annulus_bounds(nu);
  const double lo = ab.a + opt.edge_offset, hi = ab.b - opt.edge_offset;
  require(hi > lo, ErrorCode::Domain, "annulus too thin for the requested grid");
  require(lo >= ab.a + 2.0 * opt.h - 1e-12 && hi <= ab.b - 2.0 * opt.h + 1e-12,
          ErrorCode::InvalidArgument, "edge offset must be at least 2h");
  const Measure nu_s = symmetrize(nu);
  RingLaw out;
  out.a = ab.a;
  out.b = ab.b;
  const int n = opt.grid_points;
  out.r_grid.resize(n);
  for (int i = 0; i < n; ++i) out.r_grid[i] = lo + (hi - lo) * i / (n - 1);
  out.r_grid.back() = hi;
  out.log_potential.assign(n, 0.0);
  out.density.assign(n, 0.0);
  parallel_for(n, opt.threads, [&](int i) {
    const double r = out.r_grid[i];
    out.log_potential[i] = axis_route(nu_s, r);
    out.density[i] = laplacian(nu_s, r, opt.h) / (2.0 * kPi);
  });
  auto extrapolate = [&](double x, size_t i, size_t j) {
    const double slope = (out.density[j] - out.density[i]) / (out.r_grid[j] - out.r_grid[i]);
    return std::max(0.0, out.density[i] + slope * (x - out.r_grid[i]));
  };
  out.edge_density_a = extrapolate(ab.a, 0, 1);
  out.edge_density_b = extrapolate(ab.b, n - 1, n - 2);
  out.normalization_defect = std::abs(out.total_mass() - 1.0);
  return out;
}

double circle_arc_in_disc(double r, cplx z0, double R) {
  const double d = std::abs(z0);
  if (r <= 0.0) return d <= R ? 2.0 * kPi : 0.0;
  if (d == 0.0) return r <= R ? 2.0 * kPi : 0.0;
  const double c = (r * r + d * d - R * R) / (2.0 * r * d);
  if (c <= -1.0) return 2.0 * kPi;
  if (c >= 1.0) return 0.0;
  return 2.0 * std::acos(c);
}

double ring_ball_mass(const RingLaw& ring, cplx z0, double radius) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "ball radius must be positive");
  require(ring.r_grid.size() >= 2, ErrorCode::InvalidArgument, "ring law has no grid");
  double spacing = std::max(ring.r_grid.front() - ring.a, ring.b - ring.r_grid.back());
  for (size_t i = 0; i + 1 < ring.r_grid.size(); ++i)
    spacing = std::max(spacing, ring.r_grid[i + 1] - ring.r_grid[i]);
  require(spacing <= radius / 5.0, ErrorCode::GridTooCoarse,
          "ring grid spacing exceeds radius / 5");
  const double d = std::abs(z0);
  const double lo = std::max(ring.a, d - radius), hi = std::min(ring.b, d + radius);
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo, hi, ring.r_grid.front(), ring.r_grid.back(), std::abs(d - radius)};
  for (double r : ring.r_grid) cuts.push_back(r);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> points;
  for (double c : cuts)
    if (c >= lo && c <= hi && (points.empty() || c > points.back())) points.push_back(c);
  const auto& g = gauss_legendre(24);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    const double mid = 0.5 * (points[i] + points[i + 1]), half = 0.5 * (points[i + 1] - points[i]);
    for (size_t k = 0; k < g.nodes.size(); ++k) {
      const double r = mid + half * g.nodes[k];
      acc += half * g.weights[k] * r * ring.density_at_radius(r) * circle_arc_in_disc(r, z0, radius);
    }
  }
  return acc;
}

void write_ring_csv(const RingLaw& ring, std::ostream& out) {
  out << "r,log_potential,density\n";
  char buf[128];
  for (size_t i = 0; i < ring.r_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", ring.r_grid[i], ring.log_potential[i],
                  ring.density[i]);
    out << buf;
  }
}

}  // namespace ringlab
