#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ringlab/measures.hpp"
#include "ringlab/rmt.hpp"
#include "ringlab/singlering.hpp"

namespace ringlab {

/// Generalized smoothstep of order q on [0, 1]: degree 2q + 1, value 0 at 0 and
/// 1 at 1, derivatives 1..q vanishing at both ends.
class Smoothstep {
 public:
  explicit Smoothstep(int order);
  int order() const { return order_; }
  /// k-th derivative at u (clamped outside [0, 1]).
  double operator()(double u, int k = 0) const;
  /// max |S^(k)| on [0, 1].
  double sup_derivative(int k) const;

 private:
  int order_;
  std::vector<std::vector<double>> coeffs_;  // coefficients of S^(k), ascending powers
  std::vector<double> sup_;
};

/// C^{p+1} function with compact support and piecewise-polynomial structure.
struct TestFunction {
  std::function<double(double x, int derivative)> eval;
  double lo = 0.0;
  double hi = 0.0;
  int p = 1;
  /// Points where the pieces join; quadratures split there.
  std::vector<double> breakpoints;
  /// max |phi^(l)| on a 10^4 point grid, l = 0..p+1.
  std::vector<double> sup_norms;

  double operator()(double x, int k = 0) const { return eval(x, k); }
  double max_sup_norm() const;
};

/// 1 on [plateau_lo, plateau_hi], smoothstep ramps of order p + 1 down to 0
/// at lo and hi.
TestFunction smooth_bump(double lo, double plateau_lo, double plateau_hi, double hi, int p);

/// Fills sup_norms from a 10^4 point grid.
void measure_sup_norms(TestFunction& phi);

struct EsyWindow {
  double estimate = 0.0;
  /// sup |m| on the window at height eta; |nu|([E +- 2M eta]) / (M^{3/2} eta);
  /// |nu| of the two side windows / (M eta); Im m_|nu|(E + i M eta) / M.
  std::array<double, 4> bound_terms{};
};

/// (1/pi) times the mean of Im m(x + i eta) over x in [E - M eta, E + M eta].
EsyWindow esy_window(const TransformFn& m, const TransformFn& tv, double E, double eta,
                     double M);

struct HsResult {
  double value = 0.0;
  double error_bound = 0.0;
};

/// int phi dnu from m_nu by the Helffer-Sjostrand formula with the almost
/// analytic extension of order p and a cutoff chi = 1 on [0, a/2], 0 beyond a.
/// The strip eta < eta_min is dropped and bounded using |m| <= tv_norm / eta.
HsResult hs_integrate(const TestFunction& phi, const TransformFn& m, int p, double a,
                      double eta_min, double tv_norm = 1.0);

struct CutoffLogs {
  TestFunction phi;  ///< 1 on [t, 3K], support [t/2, 3K + 1]
  double t = 0.0;
  double K = 0.0;
  /// Explicit constants C_l with |phi^(l)| <= C_l t^-l on the lower ramp.
  std::vector<double> derivative_constants;

  double log_geq(double x) const;
  double log_lt(double x) const;
};

CutoffLogs cutoff_logs(double t, double K, int p = 3);

/// eps_N = (log N)^-alpha and t_N = (log N)^-(2 alpha + eps).
double srt_scale(int N, double alpha = 0.2);
double cutoff_scale(int N, double alpha = 0.2, double eps = 0.05);
/// 4 alpha (p + 2) + 2 eps (p + 1) < p
bool scale_constraint_holds(double alpha, double eps, int p);

struct LocalLawReport {
  std::string statistic;
  int N = 0;
  double scale = 0.0;
  double empirical = 0.0;
  double theoretical = 0.0;
  double difference = 0.0;
  double tolerance = 0.0;
  std::vector<std::uint64_t> seeds;
  bool pass = false;
  /// Scale inside the admissible window for the statistic.
  bool in_window = true;
};

void write_report_header(std::ostream& out);
void write_report_row(const LocalLawReport& r, std::ostream& out);

/// Radial C^2 bump f(u) = g(|u|): 1 for |u| <= 1 - width, smoothstep to 0 at |u| = 1.
struct RadialBump {
  double width = 0.5;
  double scale = 1.0;  ///< f(u / scale)
  int order = 3;

  double operator()(cplx u) const;
  double support_radius() const { return scale; }
};

/// int f((w - z0) / eps) dmu(w) for the ring law, by polar quadrature.
double ring_bump_integral(const RingLaw& ring, cplx z0, double eps, const RadialBump& f);

/// (1/N) sum F(lambda_i) against eps^-2 int f((w - z0)/eps) dmu(w).
LocalLawReport local_srt_statistic(const SpectralSample& sample, const RingLaw& ring, cplx z0,
                                   double eps, const RadialBump& f = {},
                                   bool require_interior = true);

/// count of s_i in [E - eta, E + eta] / (2 eta N) against twice the density of
/// nu_a^s [+] nu_b^s at E.
LocalLawReport local_sv_statistic(std::span<const double> singular_values, const Measure& nu_a,
                                  const Measure& nu_b, double E, double eta);

struct HadamardReport {
  double outer_sup = 0.0;
  double delta = 0.0;
  double c = 0.0;
  double r = 0.0;
  double inner_bound = 0.0;
  cplx center;
  double radius = 0.0;
  double inner_max = 0.0;
  /// Bound from log-convexity between the circle |xi| = 1/e and the growth
  /// bound (1 - |xi|) M <= c, evaluated at |xi| = r.
  double convexity_bound = 0.0;
  bool holds = false;
};

/// Checks sup |m| <= delta on the circle z = i a (e + e^{i theta}) / (e - e^{i theta})
/// and then sup |m| <= exp(-sqrt(-c log delta)) on the disc H_{a, r(delta)}.
HadamardReport hadamard_check(const TransformFn& m, double a, double delta, double tv_norm);

}  // namespace ringlab
