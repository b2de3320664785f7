#pragma once

#include <array>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "ringlab/measures.hpp"

namespace ringlab {

struct KantorovichCertificate {
  double b = 0.0;  ///< |F'(x0)^{-1} F(x0)|
  double L = 0.0;  ///< Lipschitz bound used in the check
  double r_star = 0.0;
  double r_star_star = 0.0;
};

struct NewtonOptions {
  double tol = 1e-14;
  int max_iter = 50;
  double singular_condition = 1e14;
};

struct NewtonResult {
  Eigen::VectorXd root;
  std::optional<KantorovichCertificate> certificate;
  double condition_number = 0.0;
  int iterations = 0;
  bool converged = false;
};

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Newton's method guarded by the Kantorovich test 2 b L < 1, where
/// L bounds the Lipschitz constant of F'(x0)^{-1} F'. Without a certificate
/// the result carries no certificate, root = x0 and converged = false.
NewtonResult newton_kantorovich(const VectorFn& F, const JacobianFn& Fprime,
                                const Eigen::VectorXd& x0, double lipschitz_bound,
                                const NewtonOptions& options = {});

/// Largest |F'(x0)^{-1}(F'(p) - F'(x0))| / |p - x0| over a 3x3 stencil of
/// displacements of size `radius` in the coordinate pairs (0,1) and (2,3)
/// (or in each coordinate for lower dimensions).
double estimate_lipschitz(const JacobianFn& Fprime, const Eigen::VectorXd& x0, double radius);

enum class SolveMethod { FixedPoint, NewtonPolished };

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  double newton_switch = 1e-4;
  double lipschitz_safety = 100.0;
  double damping_floor = 1.0 / 64.0;
};

struct SubordinationResult {
  cplx S_mu;  ///< omega_2 - z
  cplx S_nu;  ///< omega_1 - z
  cplx m;     ///< m_mu(z + S_nu)
  /// |m - m_mu(z + S_nu)|, |m - m_nu(z + S_mu)| and
  /// |z + 1/m + S_mu + S_nu| / max(1, |z|, 1/|m|).
  std::array<double, 3> residuals{};
  int iterations = 0;
  SolveMethod method = SolveMethod::FixedPoint;
  std::optional<KantorovichCertificate> certificate;
};

/// Solves the subordination system for mu [+] nu at z. A warm start (the
/// solution at a nearby point) is tried first with a guarded Newton step.
SubordinationResult solve_subordination(const Measure& mu, const Measure& nu, UpperHalfPoint z,
                                        const SolverOptions& options = {},
                                        const SubordinationResult* warm_start = nullptr);

cplx free_convolve_m(const Measure& mu, const Measure& nu, UpperHalfPoint z,
                     const SolverOptions& options = {});

struct WellBehavedDiagnostics {
  cplx kappa;
  double alpha = 0.0;
  double beta = 0.0;
};

WellBehavedDiagnostics diagnostics(const Measure& mu, const Measure& nu, UpperHalfPoint z,
                                   const SolverOptions& options = {});
/// Same quantities at a known solution.
WellBehavedDiagnostics diagnostics_at(const Measure& mu, const Measure& nu, cplx z,
                                      const SubordinationResult& sol);

}  // namespace ringlab
