#include "ringlab/freeconv.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ringlab {

namespace {

double condition_number(const Eigen::MatrixXd& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double op_norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

// Subordination system in real coordinates x = (Re s1, Im s1, Re s2, Im s2),
// s1 = S_mu, s2 = S_nu.
struct System {
  const Measure& mu;
  const Measure& nu;
  cplx z;

  static cplx s1(const Eigen::VectorXd& x) { return {x(0), x(1)}; }
  static cplx s2(const Eigen::VectorXd& x) { return {x(2), x(3)}; }

  cplx q(cplx a, cplx b) const {
    const cplx d = z + a + b;
    if (d == cplx(0.0)) fail(ErrorCode::Pole, "subordination pole: S_mu + S_nu = -z");
    return 1.0 / d;
  }

  Eigen::VectorXd F(const Eigen::VectorXd& x) const {
    const cplx a = s1(x), b = s2(x), qq = q(a, b);
    const cplx f1 = transform(mu, z + b) + qq;
    const cplx f2 = transform(nu, z + a) + qq;
    Eigen::VectorXd out(4);
    out << f1.real(), f1.imag(), f2.real(), f2.imag();
    return out;
  }

  Eigen::MatrixXd J(const Eigen::VectorXd& x) const {
    const cplx a = s1(x), b = s2(x), qq = q(a, b);
    const cplx q2 = qq * qq;
    const cplx c[2][2] = {{-q2, transform(mu, z + b, 1) - q2},
                          {transform(nu, z + a, 1) - q2, -q2}};
    Eigen::MatrixXd out(4, 4);
    for (int r = 0; r < 2; ++r)
      for (int k = 0; k < 2; ++k) {
        out(2 * r, 2 * k) = c[r][k].real();
        out(2 * r, 2 * k + 1) = -c[r][k].imag();
        out(2 * r + 1, 2 * k) = c[r][k].imag();
        out(2 * r + 1, 2 * k + 1) = c[r][k].real();
      }
    return out;
  }

  cplx h_mu(cplx w) const { return h(mu, w); }
  cplx h_nu(cplx w) const { return h(nu, w); }

  static cplx h(const Measure& m, cplx w) {
    const cplx v = transform(m, w);
    if (v == cplx(0.0)) fail(ErrorCode::Pole, "transform vanished in the subordination map");
    // -1/m - w = -(1 + w m) / m
    return -first_moment_transform(m, w) / v;
  }

  SubordinationResult result(cplx S_mu, cplx S_nu) const {
    SubordinationResult r;
    r.S_mu = S_mu;
    r.S_nu = S_nu;
    r.m = transform(mu, z + S_nu);
    const cplx m_nu = transform(nu, z + S_mu);
    r.residuals[0] = std::abs(r.m - transform(mu, z + S_nu));
    r.residuals[1] = std::abs(r.m - m_nu);
    const double scale = std::max({1.0, std::abs(z), 1.0 / std::abs(r.m)});
    r.residuals[2] = std::abs(z + 1.0 / r.m + S_mu + S_nu) / scale;
    return r;
  }
};

double max_residual(const SubordinationResult& r) {
  return std::max({r.residuals[0], r.residuals[1], r.residuals[2]});
}

bool admissible(const System& sys, cplx S_mu, cplx S_nu) {
  const double eta = sys.z.imag();
  const double slack = 1e-9 * (1.0 + std::abs(sys.z));
  return std::isfinite(S_mu.real()) && std::isfinite(S_mu.imag()) &&
         std::isfinite(S_nu.real()) && std::isfinite(S_nu.imag()) &&
         (sys.z + S_mu).imag() > eta - slack && (sys.z + S_nu).imag() > eta - slack;
}

// Guarded Newton polish from (S_mu, S_nu). Returns a result only when a
// Kantorovich certificate was obtained and the polished point meets tol.
std::optional<SubordinationResult> try_newton(const System& sys, cplx S_mu, cplx S_nu,
                                              const SolverOptions& opt) {
  Eigen::VectorXd x0(4);
  x0 << S_mu.real(), S_mu.imag(), S_nu.real(), S_nu.imag();
  VectorFn F = [&](const Eigen::VectorXd& x) { return sys.F(x); };
  JacobianFn J = [&](const Eigen::VectorXd& x) { return sys.J(x); };
  try {
    const Eigen::MatrixXd J0 = J(x0);
    if (condition_number(J0) > 1e14) return std::nullopt;
    const double b = J0.colPivHouseholderQr().solve(F(x0)).norm();
    const double radius = std::max(2.0 * b, 1e-9 * (1.0 + x0.norm()));
    const double L = opt.lipschitz_safety * estimate_lipschitz(J, x0, radius);
    const NewtonResult nk = newton_kantorovich(F, J, x0, L);
    if (!nk.certificate || !nk.converged) return std::nullopt;
    const cplx a = System::s1(nk.root), c = System::s2(nk.root);
    if (!admissible(sys, a, c)) return std::nullopt;
    SubordinationResult r = sys.result(a, c);
    if (max_residual(r) > opt.tol) return std::nullopt;
    r.method = SolveMethod::NewtonPolished;
    r.certificate = nk.certificate;
    r.iterations = nk.iterations;
    return r;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Pole) throw;
    return std::nullopt;
  }
}

}  // namespace

NewtonResult newton_kantorovich(const VectorFn& F, const JacobianFn& Fprime,
                                const Eigen::VectorXd& x0, double lipschitz_bound,
                                const NewtonOptions& options) {
  require(lipschitz_bound >= 0.0 && std::isfinite(lipschitz_bound), ErrorCode::InvalidArgument,
          "Lipschitz bound must be finite and non-negative");
  NewtonResult out;
  out.root = x0;
  const Eigen::MatrixXd J0 = Fprime(x0);
  require(J0.rows() == J0.cols() && J0.rows() == x0.size(), ErrorCode::InvalidArgument,
          "Jacobian shape does not match x0");
  out.condition_number = condition_number(J0);
  require(out.condition_number <= options.singular_condition, ErrorCode::Numeric,
          "Jacobian is singular at x0");
  const Eigen::VectorXd F0 = F(x0);
  const double b = J0.colPivHouseholderQr().solve(F0).norm();
  const double h = 2.0 * b * lipschitz_bound;
  if (!(h < 1.0)) return out;

  KantorovichCertificate cert;
  cert.b = b;
  cert.L = lipschitz_bound;
  const double root = std::sqrt(1.0 - h);
  cert.r_star = 2.0 * b / (1.0 + root);
  cert.r_star_star = lipschitz_bound > 0.0 ? (1.0 + root) / lipschitz_bound
                                           : std::numeric_limits<double>::infinity();
  out.certificate = cert;

  Eigen::VectorXd x = x0;
  if (b == 0.0) {
    out.converged = true;
    return out;
  }
  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::VectorXd step = Fprime(x).colPivHouseholderQr().solve(F(x));
    x -= step;
    out.iterations = it;
    if (!x.allFinite()) break;
    if (step.norm() <= options.tol * (1.0 + x.norm())) {
      out.converged = true;
      break;
    }
  }
  out.root = x;
  return out;
}

double estimate_lipschitz(const JacobianFn& Fprime, const Eigen::VectorXd& x0, double radius) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "stencil radius must be positive");
  const Eigen::Index d = x0.size();
  const Eigen::MatrixXd J0 = Fprime(x0);
  const auto solver = J0.colPivHouseholderQr();
  std::vector<Eigen::VectorXd> moves;
  if (d == 1) {
    for (double s : {-1.0, 1.0}) moves.push_back(Eigen::VectorXd::Constant(1, s * radius));
  } else {
    const Eigen::Index half = d / 2;
    Eigen::VectorXd ea = Eigen::VectorXd::Zero(d), eb = Eigen::VectorXd::Zero(d);
    ea.head(half).setOnes();
    eb.tail(d - half).setOnes();
    ea.normalize();
    eb.normalize();
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        if (i != 0 || j != 0) moves.push_back(radius * (i * ea + j * eb));
  }
  double L = 0.0;
  for (const auto& u : moves) {
    const Eigen::MatrixXd diff = solver.solve(Fprime(x0 + u) - J0);
    L = std::max(L, op_norm(diff) / u.norm());
  }
  return L;
}

SubordinationResult solve_subordination(const Measure& mu, const Measure& nu, UpperHalfPoint zp,
                                        const SolverOptions& opt,
                                        const SubordinationResult* warm_start) {
  require(zp.eta > 0.0, ErrorCode::Domain, "subordination needs Im z > 0");
  require(mu.total_mass() > 0.0 && nu.total_mass() > 0.0, ErrorCode::InvalidArgument,
          "subordination needs probability measures");
  const System sys{mu, nu, zp.z()};
  const cplx z = sys.z;
  const double eta = zp.eta;

  if (warm_start && admissible(sys, warm_start->S_mu, warm_start->S_nu)) {
    if (auto r = try_newton(sys, warm_start->S_mu, warm_start->S_nu, opt)) return *r;
  }

  cplx omega = z;
  if (warm_start && (z + warm_start->S_nu).imag() >= eta) omega = z + warm_start->S_nu;
  double damping = 1.0;
  double threshold = opt.newton_switch;
  double last = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    const cplx omega2 = z + sys.h_mu(omega);
    SubordinationResult r = sys.result(omega2 - z, omega - z);
    last = max_residual(r);
    if (!std::isfinite(last)) fail(ErrorCode::Numeric, "subordination iterate is not finite");
    if (last <= opt.tol) {
      r.iterations = it;
      r.method = SolveMethod::FixedPoint;
      return r;
    }
    if (last <= threshold) {
      if (auto polished = try_newton(sys, r.S_mu, r.S_nu, opt)) {
        polished->iterations += it;
        return *polished;
      }
      threshold *= 1e-2;
    }
    const cplx target = z + sys.h_nu(omega2);
    cplx next = omega + damping * (target - omega);
    while (next.imag() < eta && damping > opt.damping_floor) {
      damping = std::max(opt.damping_floor, 0.5 * damping);
      next = omega + damping * (target - omega);
    }
    if (next.imag() < eta) next = {next.real(), eta};
    omega = next;
  }
  std::ostringstream os;
  os.precision(17);
  os << "subordination did not converge in " << opt.max_iter << " iterations at z = " << z
     << " (residual " << last << ")";
  fail(ErrorCode::NonConvergence, os.str());
}

cplx free_convolve_m(const Measure& mu, const Measure& nu, UpperHalfPoint z,
                     const SolverOptions& options) {
  return solve_subordination(mu, nu, z, options).m;
}

WellBehavedDiagnostics diagnostics_at(const Measure& mu, const Measure& nu, cplx z,
                                      const SubordinationResult& sol) {
  const cplx w1 = z + sol.S_nu, w2 = z + sol.S_mu;
  const cplx d = z + sol.S_mu + sol.S_nu;
  if (d == cplx(0.0)) fail(ErrorCode::Pole, "subordination pole: S_mu + S_nu = -z");
  const cplx q = 1.0 / d;
  const cplx a = transform(mu, w1, 1), b = transform(nu, w2, 1);
  WellBehavedDiagnostics out;
  out.kappa = (a + b) * q * q - a * b;
  const double k = std::abs(out.kappa);
  if (!(k >= 1e-14)) {
    std::ostringstream os;
    os << "degenerate point: |kappa| = " << k;
    fail(ErrorCode::Degenerate, os.str());
  }
  out.alpha = (std::norm(q) + std::abs(a) + std::abs(b)) / k;
  out.beta = std::pow(std::abs(q), 3) + std::abs(transform(mu, w1, 2)) +
             std::abs(transform(nu, w2, 2));
  return out;
}

WellBehavedDiagnostics diagnostics(const Measure& mu, const Measure& nu, UpperHalfPoint z,
                                   const SolverOptions& options) {
  return diagnostics_at(mu, nu, z.z(), solve_subordination(mu, nu, z, options));
}

}  // namespace ringlab
