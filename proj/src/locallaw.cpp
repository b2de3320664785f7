#include "ringlab/locallaw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ringlab/freeconv.hpp"
#include "ringlab/quadrature.hpp"

namespace ringlab {

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
  return acc;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

cplx ipow(int k) {
  static const cplx table[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  return table[k % 4];
}

// Gauss-Legendre panels of n nodes between consecutive breakpoints, each
// interval split into `split` equal panels.
QuadratureRule panel_rule(std::vector<double> cuts, int n, int split) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  QuadratureRule out;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    const QuadratureRule r = composite_gauss_legendre(n, cuts[i], cuts[i + 1], split);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

// Panels of width at most `width` with n nodes each.
QuadratureRule fine_rule(double lo, double hi, double width, int n) {
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  return composite_gauss_legendre(n, lo, hi, panels);
}

const Smoothstep& cached_smoothstep(int order) {
  static std::once_flag once;
  static std::vector<std::unique_ptr<Smoothstep>> table;
  std::call_once(once, [] {
    for (int q = 1; q <= 12; ++q) table.push_back(std::make_unique<Smoothstep>(q));
  });
  require(order >= 1 && order <= 12, ErrorCode::InvalidArgument,
          "smoothstep order must lie in [1, 12]");
  return *table[order - 1];
}

}  // namespace

Smoothstep::Smoothstep(int order) : order_(order) {
  require(order >= 1 && order <= 12, ErrorCode::InvalidArgument,
          "smoothstep order must lie in [1, 12]");
  const int q = order;
  std::vector<double> c(2 * q + 2, 0.0);
  for (int n = 0; n <= q; ++n)
    c[q + 1 + n] = binomial(q + n, n) * binomial(2 * q + 1, q - n) * (n % 2 ? -1.0 : 1.0);
  coeffs_.push_back(c);
  while (coeffs_.back().size() > 1) {
    const auto& prev = coeffs_.back();
    std::vector<double> d(prev.size() - 1);
    for (size_t i = 1; i < prev.size(); ++i) d[i - 1] = prev[i] * static_cast<double>(i);
    coeffs_.push_back(d);
  }
  coeffs_.push_back({0.0});
  const int grid = 20000;
  sup_.assign(coeffs_.size(), 0.0);
  for (size_t k = 0; k < coeffs_.size(); ++k) {
    double s = 0.0;
    for (int i = 0; i <= grid; ++i) s = std::max(s, std::abs(horner(coeffs_[k], double(i) / grid)));
    sup_[k] = s;
  }
  // Grid maxima are lifted by half a cell times the next derivative's maximum.
  const std::vector<double> raw = sup_;
  for (size_t k = 0; k + 1 < coeffs_.size(); ++k) sup_[k] += 0.6 * raw[k + 1] / grid;
}

double Smoothstep::operator()(double u, int k) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return k == 0 ? 1.0 : 0.0;
  if (k >= static_cast<int>(coeffs_.size())) return 0.0;
  return horner(coeffs_[k], u);
}

double Smoothstep::sup_derivative(int k) const {
  if (k >= static_cast<int>(sup_.size())) return 0.0;
  return sup_[k];
}

double TestFunction::max_sup_norm() const {
  double m = 0.0;
  for (double v : sup_norms) m = std::max(m, v);
  return m;
}

void measure_sup_norms(TestFunction& phi) {
  const int grid = 10000;
  phi.sup_norms.assign(phi.p + 2, 0.0);
  for (int l = 0; l <= phi.p + 1; ++l)
    for (int i = 0; i <= grid; ++i) {
      const double x = phi.lo + (phi.hi - phi.lo) * i / grid;
      phi.sup_norms[l] = std::max(phi.sup_norms[l], std::abs(phi(x, l)));
    }
}

TestFunction smooth_bump(double lo, double plo, double phi_, double hi, int p) {
  require(p >= 1, ErrorCode::InvalidArgument, "order p must be at least 1");
  require(lo < plo && plo <= phi_ && phi_ < hi, ErrorCode::InvalidArgument,
          "bump needs lo < plateau_lo <= plateau_hi < hi");
  auto S = std::make_shared<Smoothstep>(p + 1);
  const double w1 = plo - lo, w2 = hi - phi_;
  TestFunction f;
  f.lo = lo;
  f.hi = hi;
  f.p = p;
  f.breakpoints = {lo, plo, phi_, hi};
  f.eval = [S, lo, plo, phi_, hi, w1, w2](double x, int k) {
    if (x <= lo || x >= hi) return 0.0;
    if (x < plo) return (*S)((x - lo) / w1, k) / std::pow(w1, k);
    if (x <= phi_) return k == 0 ? 1.0 : 0.0;
    return (*S)((hi - x) / w2, k) * (k % 2 ? -1.0 : 1.0) / std::pow(w2, k);
  };
  measure_sup_norms(f);
  return f;
}

EsyWindow esy_window(const TransformFn& m, const TransformFn& tv, double E, double eta,
                     double M) {
  require(eta > 0.0, ErrorCode::Domain, "window height must be positive");
  require(M >= 2.0, ErrorCode::InvalidArgument, "window needs M >= 2");
  auto mean_im = [&](const TransformFn& f, double lo, double hi, double* sup) {
    const QuadratureRule r = fine_rule(lo, hi, 0.5 * eta, 8);
    double acc = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i) {
      const cplx v = f(cplx(r.nodes[i], eta));
      acc += r.weights[i] * v.imag();
      if (sup) *sup = std::max(*sup, std::abs(v));
    }
    return acc / kPi;
  };
  EsyWindow out;
  double sup = 0.0;
  out.estimate = mean_im(m, E - M * eta, E + M * eta, &sup) / (2.0 * M * eta);
  out.bound_terms[0] = sup;
  out.bound_terms[1] =
      mean_im(tv, E - 2.0 * M * eta, E + 2.0 * M * eta, nullptr) / (std::pow(M, 1.5) * eta);
  const double side = std::sqrt(M) * eta;
  const double left = mean_im(tv, E - 2.0 * M * eta - side, E - 2.0 * M * eta + side, nullptr);
  const double right = mean_im(tv, E + 2.0 * M * eta - side, E + 2.0 * M * eta + side, nullptr);
  out.bound_terms[2] = (left + right) / (M * eta);
  out.bound_terms[3] = tv(cplx(E, M * eta)).imag() / M;
  return out;
}

HsResult hs_integrate(const TestFunction& phi, const TransformFn& m, int p, double a,
                      double eta_min, double tv_norm) {
  require(p >= 1, ErrorCode::InvalidArgument, "order p must be at least 1");
  require(p <= phi.p, ErrorCode::InvalidArgument, "test function lacks the required derivatives");
  require(a > 0.0 && eta_min > 0.0 && eta_min < 0.5 * a, ErrorCode::InvalidArgument,
          "need 0 < eta_min < a / 2");
  const double b = 0.5 * a;
  const Smoothstep chi_ramp(p + 1);
  auto chi = [&](double y) { return 1.0 - chi_ramp((y - b) / (a - b)); };
  auto dchi = [&](double y) { return -chi_ramp((y - b) / (a - b), 1) / (a - b); };
  const double inv_pfact = 1.0 / factorial(p);

  auto integral = [&](int n) {
    const QuadratureRule rx = panel_rule(phi.breakpoints, n, 8);
    std::vector<double> ycuts{eta_min};
    for (double y = eta_min; y < b;) {
      y = std::min(b, 2.0 * y);
      ycuts.push_back(y);
    }
    for (int k = 1; k <= 4; ++k) ycuts.push_back(b + (a - b) * k / 4.0);
    const QuadratureRule ry = panel_rule(ycuts, n, 1);
    std::vector<std::vector<double>> d(phi.p + 2, std::vector<double>(rx.nodes.size()));
    for (int l = 0; l <= p + 1; ++l)
      for (size_t i = 0; i < rx.nodes.size(); ++i) d[l][i] = phi(rx.nodes[i], l);
    double acc = 0.0;
    for (size_t j = 0; j < ry.nodes.size(); ++j) {
      const double y = ry.nodes[j];
      const double c0 = chi(y), c1 = dchi(y);
      for (size_t i = 0; i < rx.nodes.size(); ++i) {
        // pi dbar Psi = i^p/p! phi^(p+1) chi y^p + i chi' sum_l i^l/l! phi^(l) y^l
        cplx s = 0.0;
        if (c1 != 0.0) {
          double yl = 1.0, lf = 1.0;
          for (int l = 0; l <= p; ++l) {
            if (l > 0) {
              yl *= y;
              lf *= l;
            }
            s += ipow(l) * (d[l][i] * yl / lf);
          }
          s *= cplx(0.0, c1);
        }
        const cplx dbar =
            (ipow(p) * (inv_pfact * d[p + 1][i] * c0 * std::pow(y, p)) + s) / kPi;
        if (dbar == cplx(0.0)) continue;
        acc += rx.weights[i] * ry.weights[j] * (dbar * m(cplx(rx.nodes[i], y))).real();
      }
    }
    return acc;
  };
  HsResult out;
  out.value = integral(16);
  const double coarse = integral(10);
  const double L = phi.hi - phi.lo;
  const double strip = L * phi.sup_norms[p + 1] * inv_pfact / kPi * tv_norm *
                       std::pow(eta_min, p) / p;
  out.error_bound = strip + std::abs(out.value - coarse);
  return out;
}

double CutoffLogs::log_geq(double x) const {
  require(x > 0.0, ErrorCode::Domain, "log cutoff needs x > 0");
  const double f = phi(x);
  return f == 0.0 ? 0.0 : f * std::log(x);
}

double CutoffLogs::log_lt(double x) const {
  require(x > 0.0, ErrorCode::Domain, "log cutoff needs x > 0");
  const double f = phi(x);
  return f == 1.0 ? 0.0 : (1.0 - f) * std::log(x);
}

CutoffLogs cutoff_logs(double t, double K, int p) {
  require(t > 0.0 && t < K, ErrorCode::InvalidArgument, "cutoff needs 0 < t < K");
  CutoffLogs out;
  out.t = t;
  out.K = K;
  out.phi = smooth_bump(0.5 * t, t, 3.0 * K, 3.0 * K + 1.0, p);
  const Smoothstep S(p + 1);
  for (int l = 0; l <= p + 1; ++l) out.derivative_constants.push_back(std::pow(2.0, l) * S.sup_derivative(l));
  return out;
}

double srt_scale(int N, double alpha) { return std::pow(std::log(static_cast<double>(N)), -alpha); }

double cutoff_scale(int N, double alpha, double eps) {
  return std::pow(std::log(static_cast<double>(N)), -(2.0 * alpha + eps));
}

bool scale_constraint_holds(double alpha, double eps, int p) {
  return 4.0 * alpha * (p + 2) + 2.0 * eps * (p + 1) < p;
}

void write_report_header(std::ostream& out) {
  out << "statistic,N,scale,empirical,theoretical,diff,tol,seed_list,pass\n";
}

void write_report_row(const LocalLawReport& r, std::ostream& out) {
  std::ostringstream seeds;
  for (size_t i = 0; i < r.seeds.size(); ++i) seeds << (i ? ";" : "") << r.seeds[i];
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,", r.N, r.scale, r.empirical,
                r.theoretical, r.difference, r.tolerance);
  out << r.statistic << ',' << buf << seeds.str() << ',' << (r.pass ? "true" : "false") << '\n';
}

double RadialBump::operator()(cplx u) const {
  const double s = std::abs(u) / scale;
  if (s >= 1.0) return 0.0;
  if (s <= 1.0 - width) return 1.0;
  return cached_smoothstep(order)((1.0 - s) / width);
}

double ring_bump_integral(const RingLaw& ring, cplx z0, double eps, const RadialBump& f) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(f.width > 0.0 && f.width <= 1.0, ErrorCode::InvalidArgument,
          "bump width must lie in (0, 1]");
  const double R = f.support_radius() * eps;
  const double Rp = (1.0 - f.width) * R;
  const double d = std::abs(z0);
  const double lo = std::max(ring.a, d - R), hi = std::min(ring.b, d + R);
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo, hi, std::abs(d - R), std::abs(d - Rp), d + Rp};
  if (!ring.r_grid.empty()) {
    cuts.push_back(ring.r_grid.front());
    cuts.push_back(ring.r_grid.back());
  }
  for (double r : ring.r_grid) cuts.push_back(r);
  std::vector<double> inside;
  for (double c : cuts)
    if (c >= lo && c <= hi) inside.push_back(c);
  const QuadratureRule rr = panel_rule(inside, 12, 1);
  const auto& g = gauss_legendre(16);
  double acc = 0.0;
  for (size_t k = 0; k < rr.nodes.size(); ++k) {
    const double r = rr.nodes[k];
    const double rho = ring.density_at_radius(r);
    if (rho == 0.0) continue;
    // Half-angles (from the direction of z0) of the plateau and support arcs.
    const double tp = 0.5 * circle_arc_in_disc(r, d, Rp);
    const double ts = 0.5 * circle_arc_in_disc(r, d, R);
    double ang = 2.0 * tp;
    if (ts > tp) {
      for (int panel = 0; panel < 2; ++panel) {
        const double a0 = tp + (ts - tp) * panel / 2.0, a1 = tp + (ts - tp) * (panel + 1) / 2.0;
        const double mid = 0.5 * (a0 + a1), half = 0.5 * (a1 - a0);
        for (size_t j = 0; j < g.nodes.size(); ++j) {
          const double th = mid + half * g.nodes[j];
          const cplx w = std::polar(r, th) - cplx(d, 0.0);
          ang += 2.0 * half * g.weights[j] * f(w / eps);
        }
      }
    }
    acc += rr.weights[k] * r * rho * ang;
  }
  return acc;
}

LocalLawReport local_srt_statistic(const SpectralSample& sample, const RingLaw& ring, cplx z0,
                                   double eps, const RadialBump& f, bool require_interior) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(!sample.eigenvalues.empty(), ErrorCode::InvalidArgument, "sample has no eigenvalues");
  if (require_interior) {
    const double d = std::abs(z0);
    require(d > ring.a && d < ring.b, ErrorCode::OutOfSupport,
            "z0 must lie in the open annulus");
  }
  LocalLawReport r;
  r.statistic = "local_srt";
  r.N = static_cast<int>(sample.eigenvalues.size());
  r.scale = eps;
  double acc = 0.0;
  for (cplx l : sample.eigenvalues) acc += f((l - z0) / eps);
  r.empirical = acc / (r.N * eps * eps);
  r.theoretical = ring_bump_integral(ring, z0, eps, f) / (eps * eps);
  r.difference = r.empirical - r.theoretical;
  r.tolerance = 0.25;
  r.pass = std::abs(r.difference) <= r.tolerance * std::abs(r.theoretical);
  r.seeds = {sample.seed_used};
  return r;
}

LocalLawReport local_sv_statistic(std::span<const double> sv, const Measure& nu_a,
                                  const Measure& nu_b, double E, double eta) {
  require(!sv.empty(), ErrorCode::InvalidArgument, "no singular values");
  require(eta > 0.0, ErrorCode::Domain, "window half-width must be positive");
  const Measure a = symmetrize(nu_a), b = symmetrize(nu_b);
  const WellBehavedDiagnostics diag = diagnostics(a, b, {E, 1e-3});
  if (std::abs(diag.kappa) < 1e-6) {
    std::ostringstream os;
    os << "degenerate point E = " << E << ": |kappa| = " << std::abs(diag.kappa);
    fail(ErrorCode::Degenerate, os.str());
  }
  const DensityEstimate rho = density_at(
      [&](cplx w) { return free_convolve_m(a, b, UpperHalfPoint::from(w)); }, E,
      default_eta_schedule());
  LocalLawReport r;
  r.statistic = "local_sv";
  r.N = static_cast<int>(sv.size());
  r.scale = eta;
  long count = 0;
  for (double s : sv)
    if (s >= E - eta && s <= E + eta) ++count;
  r.empirical = count / (2.0 * eta * r.N);
  r.theoretical = 2.0 * std::max(0.0, rho.density);
  r.difference = r.empirical - r.theoretical;
  r.tolerance = 0.1;
  r.pass = std::abs(r.difference) <= r.tolerance * r.theoretical;
  r.in_window = eta >= 2.0 * std::pow(static_cast<double>(r.N), -0.125) && eta <= 0.2;
  return r;
}

HadamardReport hadamard_check(const TransformFn& m, double a, double delta, double tv_norm) {
  require(a > 0.0, ErrorCode::InvalidArgument, "a must be positive");
  require(delta >= 0.0 && tv_norm >= 0.0, ErrorCode::InvalidArgument,
          "delta and the total variation must be non-negative");
  const int n = 64;
  const cplx I(0.0, 1.0);
  const double e = std::numbers::e;
  HadamardReport out;
  out.delta = delta;
  for (int k = 0; k < n; ++k) {
    const cplx u = std::polar(1.0, 2.0 * kPi * k / n);
    out.outer_sup = std::max(out.outer_sup, std::abs(m(I * a * (e + u) / (e - u))));
  }
  if (out.outer_sup > delta) {
    std::ostringstream os;
    os << "hypothesis violated: sup |m| on the circle is " << out.outer_sup << " > delta = " << delta;
    fail(ErrorCode::HypothesisViolated, os.str());
  }
  out.c = 2.0 * tv_norm / a;
  if (delta == 0.0 || out.c == 0.0) {
    out.r = 1.0 / e;
    out.inner_bound = out.outer_sup;
    out.convexity_bound = out.outer_sup;
  } else {
    const double L = -std::log(delta);
    if (!(L >= out.c)) {
      std::ostringstream os;
      os << "delta = " << delta << " is not small enough for c = " << out.c
         << " (need -log delta >= c)";
      fail(ErrorCode::OutOfRegime, os.str());
    }
    out.r = std::exp(-4.0 * std::sqrt(out.c / L));
    out.inner_bound = std::exp(-std::sqrt(out.c * L));
    const double s = std::log(out.r);
    if (s <= -1.0) {
      out.convexity_bound = delta;
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 1; k < 2000; ++k) {
        const double s1 = s + (0.0 - s) * k / 2000.0;
        const double growth = std::log(out.c / (1.0 - std::exp(s1)));
        best = std::min(best, ((s1 - s) * (-L) + (s + 1.0) * growth) / (s1 + 1.0));
      }
      out.convexity_bound = std::exp(best);
    }
    if (out.convexity_bound > out.inner_bound) {
      std::ostringstream os;
      os << "delta = " << delta << " is above the regime where the bound follows (convexity gives "
         << out.convexity_bound << " > " << out.inner_bound << ")";
      fail(ErrorCode::OutOfRegime, os.str());
    }
  }
  const double r2 = out.r * out.r;
  out.center = I * a * (1.0 + r2) / (1.0 - r2);
  out.radius = a * 2.0 * out.r / (1.0 - r2);
  for (int k = 0; k < n; ++k) {
    const cplx xi = std::polar(out.r, 2.0 * kPi * (k + 0.5) / n);
    out.inner_max = std::max(out.inner_max, std::abs(m(I * a * (1.0 + xi) / (1.0 - xi))));
  }
  out.holds = out.inner_max <= out.inner_bound;
  return out;
}

}  // namespace ringlab
