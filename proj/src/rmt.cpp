#include "ringlab/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <numbers>

#include "ringlab/quadrature.hpp"

namespace ringlab {

namespace {

using Vec = Eigen::VectorXcd;

// Runs compute(i) for every draw in rounds of `threads` and hands the results
// to consume(i, value) in index order, so sums do not depend on the worker count.
template <class Draw, class Compute, class Consume>
void ordered_draws(int samples, int threads, Compute compute, Consume consume) {
  const int batch = std::max(1, threads);
  std::vector<Draw> slot(batch);
  for (int start = 0; start < samples; start += batch) {
    const int count = std::min(batch, samples - start);
    parallel_for(count, threads, [&](int j) { slot[j] = compute(start + j); });
    for (int j = 0; j < count; ++j) consume(start + j, std::move(slot[j]));
  }
}

double named_cdf(const NamedLaw& law, double x) {
  auto base = [&](double t) {
    switch (law.kind) {
      case LawKind::Uniform:
        return std::clamp((t - law.p1) / (law.p2 - law.p1), 0.0, 1.0);
      case LawKind::Arcsine: {
        const double h = law.p1;
        if (t <= -h) return 0.0;
        if (t >= h) return 1.0;
        return 0.5 + std::asin(t / h) / std::numbers::pi;
      }
      case LawKind::Semicircle: {
        const double R = law.p1;
        if (t <= -R) return 0.0;
        if (t >= R) return 1.0;
        return 0.5 + (t * std::sqrt(R * R - t * t) / (R * R) + std::asin(t / R)) / std::numbers::pi;
      }
      case LawKind::SymmetricBernoulli:
        return t < -law.p1 ? 0.0 : (t < law.p1 ? 0.5 : 1.0);
    }
    return 0.0;
  };
  if (!law.symmetrized) return base(x);
  return 0.5 * (base(x) + 1.0 - base(-x));
}

// |z|^2 block of a 2 x 2 matrix: largest singular value.
double norm2x2(cplx a, cplx b, cplx c, cplx d) {
  const double S = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
  const double det = std::abs(a * d - b * c);
  return std::sqrt(0.5 * (S + std::sqrt(std::max(0.0, S * S - 4.0 * det * det))));
}

struct Blocks {
  Vec d11, d12, d21, d22;

  void resize(int N) {
    for (Vec* v : {&d11, &d12, &d21, &d22}) v->setZero(N);
  }
  Blocks& operator+=(const Blocks& o) {
    d11 += o.d11;
    d12 += o.d12;
    d21 += o.d21;
    d22 += o.d22;
    return *this;
  }
  Blocks scaled(double s) const { return {d11 * s, d12 * s, d21 * s, d22 * s}; }
};

// Entries of (**A** - w)^-1 for diagonal A with entries t: the 2 x 2 block
// (-w, t; t, -w)^-1.
Blocks diagonal_resolvent(const std::vector<double>& t, cplx w) {
  const int N = static_cast<int>(t.size());
  Blocks b;
  b.resize(N);
  for (int i = 0; i < N; ++i) {
    const cplx den = w * w - t[i] * t[i];
    b.d11(i) = -w / den;
    b.d22(i) = -w / den;
    b.d12(i) = -t[i] / den;
    b.d21(i) = -t[i] / den;
  }
  return b;
}

CMatrix dense(const Blocks& b) {
  const Eigen::Index N = b.d11.size();
  CMatrix M = CMatrix::Zero(2 * N, 2 * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    M(i, i) = b.d11(i);
    M(i, N + i) = b.d12(i);
    M(N + i, i) = b.d21(i);
    M(N + i, N + i) = b.d22(i);
  }
  return M;
}

// Average over indices with equal values of `key`.
Blocks class_average(const Blocks& b, const std::vector<double>& key) {
  std::map<double, std::vector<int>> classes;
  for (int i = 0; i < static_cast<int>(key.size()); ++i) classes[key[i]].push_back(i);
  Blocks out = b;
  for (const auto& [value, idx] : classes) {
    (void)value;
    for (auto [src, dst] : {std::pair{&b.d11, &out.d11}, std::pair{&b.d12, &out.d12},
                            std::pair{&b.d21, &out.d21}, std::pair{&b.d22, &out.d22}}) {
      cplx acc = 0.0;
      for (int i : idx) acc += (*src)(i);
      acc /= static_cast<double>(idx.size());
      for (int i : idx) (*dst)(i) = acc;
    }
  }
  return out;
}

double block_norm(const Blocks& b) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < b.d11.size(); ++i)
    out = std::max(out, norm2x2(b.d11(i), b.d12(i), b.d21(i), b.d22(i)));
  return out;
}

Blocks difference(const Blocks& a, const Blocks& b) {
  return {a.d11 - b.d11, a.d12 - b.d12, a.d21 - b.d21, a.d22 - b.d22};
}

// diag(X Y)
Vec diag_of_product(const CMatrix& X, const CMatrix& Y) {
  return (X.array() * Y.transpose().array()).rowwise().sum();
}

CMatrix scale_columns(const CMatrix& X, const Vec& D) { return X * D.asDiagonal(); }

// Resolvent of the Hermitization of X through the Gram shifts:
// G11 = z I1, G12 = X I2, G21 = X* I1, G22 = z I2 with
// I1 = (X X* - z^2)^-1 and I2 = (X* X - z^2)^-1.
struct GramResolvent {
  CMatrix I1, I2;
  cplx z;

  GramResolvent(const CMatrix& X, cplx zz) : z(zz) {
    CMatrix XX = multiply(X, Op::None, X, Op::Adjoint);
    CMatrix XhX = multiply(X, Op::Adjoint, X, Op::None);
    XX.diagonal().array() -= z * z;
    XhX.diagonal().array() -= z * z;
    I1 = inverse(XX);
    I2 = inverse(XhX);
  }

  Blocks diagonals(const CMatrix& X) const {
    Blocks b;
    b.d11 = z * I1.diagonal();
    b.d22 = z * I2.diagonal();
    b.d12 = diag_of_product(X, I2);
    b.d21 = (X.conjugate().array() * I1.array()).colwise().sum().transpose();
    return b;
  }

  CMatrix dense(const CMatrix& X) const {
    const Eigen::Index N = X.rows();
    CMatrix G(2 * N, 2 * N);
    G.topLeftCorner(N, N) = z * I1;
    G.topRightCorner(N, N) = multiply(X, Op::None, I2, Op::None);
    G.bottomLeftCorner(N, N) = multiply(X, Op::Adjoint, I1, Op::None);
    G.bottomRightCorner(N, N) = z * I2;
    return G;
  }
};

bool all_zero(const std::optional<std::vector<double>>& v) {
  return !v || std::all_of(v->begin(), v->end(), [](double x) { return x == 0.0; });
}

void fill_ginibre(CMatrix& M, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const double re = g(rng);
      const double im = g(rng);
      M(i, j) = cplx(re, im);
    }
}

// One draw of the sum model with A = diag(T).
struct SumDraw {
  cplx m, fA, fB;
  Blocks G;     // original frame
  Blocks GB;    // frame where B~ = diag(B)
  Blocks SD;    // tau(G) B G - tau(G B) G
  CMatrix G_full, GB_full, SD_full;
};

struct SumDrawOptions {
  bool b_frame = true;
  bool schwinger_dyson = false;
  bool raw = false;
};

SumDraw sum_draw(const ModelSpec& spec, cplx z, std::uint64_t index, const SumDrawOptions& o) {
  const int N = spec.N;
  SumDraw d;
  std::mt19937_64 rng(derive_seed(spec.seed, index));
  if (all_zero(spec.B)) {
    d.G = diagonal_resolvent(spec.T, z);
    d.GB = d.G;
    d.SD.resize(N);
    d.m = resolvent_trace(spec.T, UpperHalfPoint::from(z));
    cplx fa = 0.0;
    for (int i = 0; i < N; ++i) fa += spec.T[i] * (d.G.d12(i) + d.G.d21(i));
    d.fA = fa / (2.0 * N);
    d.fB = 0.0;
    if (o.raw) {
      d.G_full = dense(d.G);
      d.GB_full = d.G_full;
      d.SD_full = CMatrix::Zero(2 * N, 2 * N);
    }
    return d;
  }
  const std::vector<double>& b = *spec.B;
  const CMatrix Ub = haar_unitary(N, rng);
  const CMatrix Vb = haar_unitary(N, rng);
  Vec bv(N), tv(N);
  for (int i = 0; i < N; ++i) {
    bv(i) = b[i];
    tv(i) = spec.T[i];
  }
  const CMatrix Bt = multiply(scale_columns(Ub, bv), Op::None, Vb, Op::Adjoint);
  CMatrix X = Bt;
  X.diagonal() += tv;
  const GramResolvent R(X, z);
  d.G = R.diagonals(X);
  d.m = (d.G.d11.sum() + d.G.d22.sum()) / (2.0 * N);
  d.fA = (tv.array() * (d.G.d12 + d.G.d21).array()).sum() / (2.0 * N);

  if (o.b_frame) {
    // U~* X V~ = U~* A V~ + diag(B)
    const CMatrix TV = tv.asDiagonal() * Vb;
    CMatrix XB = multiply(Ub, Op::Adjoint, TV, Op::None);
    XB.diagonal() += bv;
    const GramResolvent RB(XB, z);
    d.GB = RB.diagonals(XB);
    d.fB = (bv.array() * (d.GB.d12 + d.GB.d21).array()).sum() / (2.0 * N);
    if (o.raw) d.GB_full = RB.dense(XB);
  } else {
    // Tr(G12 B~*) + Tr(G21 B~) = Tr(B~* X I2) + Tr(B~ X* I1)
    const Vec bhg12 = diag_of_product(multiply(Bt, Op::Adjoint, X, Op::None), R.I2);
    const Vec bg21 = diag_of_product(multiply(Bt, Op::None, X, Op::Adjoint), R.I1);
    d.fB = (bhg12.sum() + bg21.sum()) / (2.0 * N);
  }

  if (o.schwinger_dyson) {
    const Vec bg21 = diag_of_product(multiply(Bt, Op::None, X, Op::Adjoint), R.I1);
    const Vec bg22 = z * diag_of_product(Bt, R.I2);
    const Vec bhg11 = z * diag_of_product(Bt.adjoint(), R.I1);
    const Vec bhg12 = diag_of_product(multiply(Bt, Op::Adjoint, X, Op::None), R.I2);
    const cplx t1 = d.G.d11.mean(), t2 = d.G.d22.mean();
    const cplx c1 = bhg12.mean(), c2 = bg21.mean();
    d.SD.d11 = t1 * bg21 - c1 * d.G.d11;
    d.SD.d12 = t1 * bg22 - c1 * d.G.d12;
    d.SD.d21 = t2 * bhg11 - c2 * d.G.d21;
    d.SD.d22 = t2 * bhg12 - c2 * d.G.d22;
    if (o.raw) {
      const CMatrix G = R.dense(X);
      CMatrix T1(2 * N, 2 * N), T2(2 * N, 2 * N);
      T1.topLeftCorner(N, N) = t1 * multiply(Bt, Op::None, G.bottomLeftCorner(N, N), Op::None);
      T1.topRightCorner(N, N) = t1 * multiply(Bt, Op::None, G.bottomRightCorner(N, N), Op::None);
      T1.bottomLeftCorner(N, N) = t2 * multiply(Bt, Op::Adjoint, G.topLeftCorner(N, N), Op::None);
      T1.bottomRightCorner(N, N) = t2 * multiply(Bt, Op::Adjoint, G.topRightCorner(N, N), Op::None);
      T2.topRows(N) = c1 * G.topRows(N);
      T2.bottomRows(N) = c2 * G.bottomRows(N);
      d.SD_full = T1 - T2;
    }
  }
  if (o.raw) d.G_full = R.dense(X);
  return d;
}

template <class F>
double jackknife(int n, F leave_out) {
  std::vector<double> theta(n);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    theta[i] = leave_out(i);
    mean += theta[i];
  }
  mean /= n;
  double acc = 0.0;
  for (double t : theta) acc += (t - mean) * (t - mean);
  return std::sqrt((n - 1.0) / n * acc);
}

double standard_error(const std::vector<cplx>& v) {
  const int n = static_cast<int>(v.size());
  cplx mean = 0.0;
  for (cplx x : v) mean += x;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (cplx x : v) acc += std::norm(x - mean);
  return std::sqrt(acc / (n - 1.0) / n);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ (index * 0xd1342543de82ef95ULL + 1));
}

double ModelSpec::K() const {
  double k = 0.0;
  for (double t : T) k = std::max(k, t);
  if (B)
    for (double t : *B) k = std::max(k, t);
  return k;
}

void ModelSpec::validate(double K_max) const {
  require(N >= 2, ErrorCode::InvalidArgument, "model needs N >= 2");
  require(static_cast<int>(T.size()) == N, ErrorCode::InvalidArgument,
          "T must have N singular values");
  if (B)
    require(static_cast<int>(B->size()) == N, ErrorCode::InvalidArgument,
            "B must have N singular values");
  auto ok = [](double x) { return std::isfinite(x) && x >= 0.0; };
  require(std::all_of(T.begin(), T.end(), ok), ErrorCode::InvalidArgument,
          "singular values must be finite and non-negative");
  if (B)
    require(std::all_of(B->begin(), B->end(), ok), ErrorCode::InvalidArgument,
            "singular values must be finite and non-negative");
  require(K() <= K_max, ErrorCode::OutOfRegime, "model norm exceeds K_max");
}

double cdf(const Measure& nu, double x) {
  if (nu.law()) return named_cdf(*nu.law(), x);
  double acc = 0.0;
  for (const Atom& a : nu.atoms())
    if (a.location <= x) acc += a.weight;
  for (const Segment& s : nu.segments()) {
    if (x <= s.lo) continue;
    if (x >= s.hi) {
      for (size_t i = 0; i < s.nodes.size(); ++i) acc += s.weights[i] * s.density[i];
      continue;
    }
    // Node masses with the straddling node split linearly over its cell.
    for (size_t i = 0; i < s.nodes.size(); ++i) {
      const double left = i == 0 ? s.lo : 0.5 * (s.nodes[i - 1] + s.nodes[i]);
      const double right = i + 1 == s.nodes.size() ? s.hi : 0.5 * (s.nodes[i] + s.nodes[i + 1]);
      const double mass = s.weights[i] * s.density[i];
      if (x >= right) acc += mass;
      else if (x > left) acc += mass * (x - left) / (right - left);
    }
  }
  return acc;
}

std::vector<double> quantile_values(const Measure& nu, int N) {
  require(N >= 1, ErrorCode::InvalidArgument, "need N >= 1");
  require(nu.positive() && std::abs(nu.total_mass() - 1.0) < 1e-9, ErrorCode::InvalidArgument,
          "quantiles need a probability measure");
  const double lo0 = nu.support_lo(), hi0 = nu.support_hi();
  std::vector<double> out(N);
  for (int i = 0; i < N; ++i) {
    const double p = (i + 0.5) / N;
    double lo = lo0, hi = hi0;
    if (cdf(nu, lo) >= p) {
      out[i] = lo;
      continue;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(nu, mid) >= p) hi = mid;
      else lo = mid;
    }
    double q = hi;
    for (const Atom& a : nu.atoms())
      if (std::abs(a.location - q) <= 1e-9 * (1.0 + std::abs(q))) q = a.location;
    out[i] = q;
  }
  return out;
}

ModelSpec model_from_laws(const Measure& T_law, int N, std::uint64_t seed, const Measure* B_law) {
  ModelSpec spec;
  spec.N = N;
  spec.seed = seed;
  spec.T = quantile_values(T_law, N);
  if (B_law) spec.B = quantile_values(*B_law, N);
  return spec;
}

CMatrix complex_ginibre(int N, std::mt19937_64& rng) {
  require(N >= 1, ErrorCode::InvalidArgument, "need N >= 1");
  CMatrix M(N, N);
  fill_ginibre(M, rng);
  return M;
}

Eigen::VectorXd goe_eigenvalues(int N, std::mt19937_64& rng) {
  require(N >= 1, ErrorCode::InvalidArgument, "need N >= 1");
  std::normal_distribution<double> g(0.0, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::MatrixXd H(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i <= j; ++i) {
      const double v = g(rng) * s;
      H(i, j) = H(j, i) = i == j ? std::sqrt(2.0) * v : v;
    }
  return symmetric_eigenvalues(H);
}

CMatrix haar_unitary(int N, std::mt19937_64& rng) { return qr_unitary(complex_ginibre(N, rng)); }

CMatrix model_matrix(const ModelSpec& spec, std::mt19937_64& rng) {
  const int N = spec.N;
  Vec tv(N);
  for (int i = 0; i < N; ++i) tv(i) = spec.T[i];
  CMatrix A;
  if (spec.a_is_diagonal) {
    A = CMatrix::Zero(N, N);
    A.diagonal() = tv;
  } else {
    const CMatrix U = haar_unitary(N, rng);
    const CMatrix V = haar_unitary(N, rng);
    A = multiply(scale_columns(U, tv), Op::None, V, Op::None);
  }
  if (spec.B) {
    Vec bv(N);
    for (int i = 0; i < N; ++i) bv(i) = (*spec.B)[i];
    const CMatrix Ub = haar_unitary(N, rng);
    const CMatrix Vb = haar_unitary(N, rng);
    A += multiply(scale_columns(Ub, bv), Op::None, Vb, Op::Adjoint);
  }
  return A;
}

SpectralSample sample_model(const ModelSpec& spec, std::mt19937_64& rng,
                            const SampleRequest& request) {
  spec.validate(std::numeric_limits<double>::infinity());
  const CMatrix A = model_matrix(spec, rng);
  SpectralSample out;
  if (request.eigenvalues) {
    const CVector ev = eigenvalues(A);
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  }
  CMatrix M = A;
  if (request.target == SvTarget::Shifted) {
    M = -A;
    M.diagonal().array() += request.z0;
  }
  Svd s = svd(M, request.vectors);
  out.singular_values.assign(s.s.data(), s.s.data() + s.s.size());
  if (request.vectors) {
    out.left_vectors = std::move(s.U);
    out.right_vectors = std::move(s.V);
  }
  return out;
}

SpectralSample sample_model(const ModelSpec& spec, const SampleRequest& request,
                            std::uint64_t index) {
  const std::uint64_t seed = derive_seed(spec.seed, index);
  std::mt19937_64 rng(seed);
  SpectralSample out = sample_model(spec, rng, request);
  out.seed_used = seed;
  return out;
}

void write_sample_csv(const SpectralSample& sample, std::ostream& out) {
  out << "index,re_lambda,im_lambda,s\n";
  const size_t n = std::max(sample.eigenvalues.size(), sample.singular_values.size());
  char buf[64];
  for (size_t i = 0; i < n; ++i) {
    out << i << ',';
    if (i < sample.eigenvalues.size()) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,", sample.eigenvalues[i].real(),
                    sample.eigenvalues[i].imag());
      out << buf;
    } else {
      out << ",,";
    }
    if (i < sample.singular_values.size()) {
      std::snprintf(buf, sizeof buf, "%.17g", sample.singular_values[i]);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<double> hermitize_spectrum(std::span<const double> singular_values) {
  std::vector<double> out;
  out.reserve(2 * singular_values.size());
  for (double s : singular_values) {
    out.push_back(-s);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

cplx resolvent_trace(std::span<const double> singular_values, UpperHalfPoint zp) {
  require(!singular_values.empty(), ErrorCode::InvalidArgument, "no singular values");
  const cplx z = zp.z();
  cplx acc = 0.0;
  for (double s : singular_values) acc += -2.0 * z / (z * z - s * s);
  return acc / (2.0 * static_cast<double>(singular_values.size()));
}

std::pair<cplx, cplx> tau_block(const CMatrix& M) {
  require(M.rows() == M.cols() && M.rows() % 2 == 0 && M.rows() > 0, ErrorCode::InvalidArgument,
          "tau_block needs a square matrix of even dimension");
  const Eigen::Index N = M.rows() / 2;
  return {M.topLeftCorner(N, N).trace() / static_cast<double>(N),
          M.bottomRightCorner(N, N).trace() / static_cast<double>(N)};
}

CMatrix hermitization(const CMatrix& X) {
  const Eigen::Index N = X.rows();
  CMatrix H = CMatrix::Zero(2 * N, 2 * N);
  H.topRightCorner(N, N) = X;
  H.bottomLeftCorner(N, N) = X.adjoint();
  return H;
}

CMatrix hermitized_resolvent(const CMatrix& X, cplx z) {
  require(z.imag() > 0.0, ErrorCode::Domain, "resolvent needs Im z > 0");
  return GramResolvent(X, z).dense(X);
}

SubordinationEstimate estimate_subordination(const ModelSpec& spec, UpperHalfPoint zp,
                                             int samples, const EstimateOptions& opt) {
  spec.validate();
  require(samples >= 2, ErrorCode::InvalidArgument, "need at least 2 samples");
  const int N = spec.N;
  const cplx z = zp.z();
  SumDrawOptions o;
  o.raw = opt.raw_norms;
  Blocks G, GB;
  G.resize(N);
  GB.resize(N);
  CMatrix G_full, GB_full;
  if (o.raw) {
    G_full = CMatrix::Zero(2 * N, 2 * N);
    GB_full = CMatrix::Zero(2 * N, 2 * N);
  }
  std::vector<cplx> ms(samples), fas(samples), fbs(samples);
  ordered_draws<SumDraw>(
      samples, opt.threads, [&](int i) { return sum_draw(spec, z, i, o); },
      [&](int i, SumDraw&& d) {
        ms[i] = d.m;
        fas[i] = d.fA;
        fbs[i] = d.fB;
        G += d.G;
        GB += d.GB;
        if (o.raw) {
          G_full += d.G_full;
          GB_full += d.GB_full;
        }
      });
  cplx m = 0.0, fa = 0.0, fb = 0.0;
  for (int i = 0; i < samples; ++i) {
    m += ms[i];
    fa += fas[i];
    fb += fbs[i];
  }
  const double inv = 1.0 / samples;
  m *= inv;
  fa *= inv;
  fb *= inv;
  require(std::abs(m) >= 1e-12, ErrorCode::Numeric, "average m_H vanished");
  SubordinationEstimate e;
  e.samples = samples;
  e.m_H_emp = m;
  e.f_A_emp = fa;
  e.f_B_emp = fb;
  e.S_A_emp = -fa / m;
  e.S_B_emp = -fb / m;
  e.consistency_defect = std::abs(m + 1.0 / (z + e.S_A_emp + e.S_B_emp));

  const std::vector<double> bvals = spec.B ? *spec.B : std::vector<double>(N, 0.0);
  const Blocks GA = diagonal_resolvent(spec.T, z + e.S_B_emp);
  const Blocks GBt = diagonal_resolvent(bvals, z + e.S_A_emp);
  const Blocks avg = G.scaled(inv), avgB = GB.scaled(inv);
  const Blocks RA = difference(class_average(avg, spec.T), GA);
  const Blocks RB = difference(class_average(avgB, bvals), GBt);
  e.resolvent_residual_A = block_norm(RA);
  e.resolvent_residual_B = block_norm(RB);
  e.trace_residual_A = (RA.d11.sum() + RA.d22.sum()) / (2.0 * N);
  e.trace_residual_B = (RB.d11.sum() + RB.d22.sum()) / (2.0 * N);
  e.trace_residual_B_over_N = (RB.d11.sum() + RB.d22.sum()) / static_cast<double>(N);
  if (o.raw) {
    e.raw_residual_A = operator_norm(G_full * inv - dense(GA));
    e.raw_residual_B = operator_norm(GB_full * inv - dense(GBt));
  }
  const double bound = -opt.im_s_constant / (samples * std::pow(zp.eta, 7));
  e.im_s_ok = e.S_A_emp.imag() >= bound && e.S_B_emp.imag() >= bound;

  e.se_m_H = standard_error(ms);
  e.se_f_A = standard_error(fas);
  e.se_f_B = standard_error(fbs);
  const cplx sm = m * static_cast<double>(samples), sa = fa * static_cast<double>(samples),
             sb = fb * static_cast<double>(samples);
  e.se_S_A = jackknife(samples, [&](int i) {
    return std::abs(-(sa - fas[i]) / (sm - ms[i]) - e.S_A_emp);
  });
  e.se_S_B = jackknife(samples, [&](int i) {
    return std::abs(-(sb - fbs[i]) / (sm - ms[i]) - e.S_B_emp);
  });
  return e;
}

SchwingerDysonResult schwinger_dyson_residual(const ModelSpec& spec, UpperHalfPoint zp,
                                              int samples, const EstimateOptions& opt) {
  spec.validate();
  require(samples >= 2, ErrorCode::InvalidArgument, "need at least 2 samples");
  const int N = spec.N;
  SumDrawOptions o;
  o.b_frame = false;
  o.schwinger_dyson = true;
  o.raw = opt.raw_norms;
  std::vector<Blocks> per(samples);
  CMatrix full;
  if (o.raw) full = CMatrix::Zero(2 * N, 2 * N);
  ordered_draws<SumDraw>(
      samples, opt.threads, [&](int i) { return sum_draw(spec, zp.z(), i, o); },
      [&](int i, SumDraw&& d) {
        per[i] = class_average(d.SD, spec.T);
        if (o.raw) full += d.SD_full;
      });
  Blocks total;
  total.resize(N);
  for (const Blocks& b : per) total += b;
  SchwingerDysonResult out;
  out.residual = block_norm(total.scaled(1.0 / samples));
  out.standard_error = jackknife(samples, [&](int i) {
    return block_norm(difference(total, per[i]).scaled(1.0 / (samples - 1)));
  });
  if (o.raw) out.raw_residual = operator_norm(full / static_cast<double>(samples));
  return out;
}

double block_structure_defect(const ModelSpec& spec, UpperHalfPoint zp, int samples,
                              int threads) {
  spec.validate();
  require(samples >= 1, ErrorCode::InvalidArgument, "need at least 1 sample");
  const int N = spec.N;
  SumDrawOptions o;
  o.b_frame = false;
  o.raw = true;
  CMatrix total = CMatrix::Zero(2 * N, 2 * N);
  ordered_draws<SumDraw>(
      samples, threads, [&](int i) { return sum_draw(spec, zp.z(), i, o); },
      [&](int, SumDraw&& d) { total += d.G_full; });
  total /= static_cast<double>(samples);
  double out = 0.0;
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj)
      for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
          if (i != j) out = std::max(out, std::abs(total(bi * N + i, bj * N + j)));
  return out;
}

DelocalizationStats delocalization_stats(const SpectralSample& sample, double E, double eps) {
  require(sample.left_vectors && sample.right_vectors, ErrorCode::InvalidArgument,
          "sample carries no singular vectors");
  DelocalizationStats out;
  const CMatrix& U = *sample.left_vectors;
  const CMatrix& V = *sample.right_vectors;
  for (size_t a = 0; a < sample.singular_values.size(); ++a) {
    const double s = sample.singular_values[a];
    if (s < E - eps || s > E + eps) continue;
    ++out.count_in_window;
    out.max_u_component_sq =
        std::max(out.max_u_component_sq, U.col(static_cast<Eigen::Index>(a)).cwiseAbs2().maxCoeff());
    out.max_v_component_sq =
        std::max(out.max_v_component_sq, V.col(static_cast<Eigen::Index>(a)).cwiseAbs2().maxCoeff());
  }
  return out;
}

double empirical_quantile(std::vector<double> values, double p) {
  require(!values.empty(), ErrorCode::InvalidArgument, "no values");
  require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * (values.size() - 1);
  const size_t i = static_cast<size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double t = pos - i;
  return values[i] + t * (values[i + 1] - values[i]);
}

SminProbe smallest_sv_probe(const ModelSpec& spec, cplx z0, int seeds, int threads) {
  spec.validate(std::numeric_limits<double>::infinity());
  require(seeds >= 1, ErrorCode::InvalidArgument, "need at least one seed");
  SminProbe out;
  out.values.assign(seeds, 0.0);
  SampleRequest req;
  req.target = SvTarget::Shifted;
  req.z0 = z0;
  req.eigenvalues = false;
  parallel_for(seeds, threads, [&](int i) {
    out.values[i] = sample_model(spec, req, static_cast<std::uint64_t>(i)).singular_values.back();
  });
  out.probabilities = {0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0};
  for (double p : out.probabilities) out.quantiles.push_back(empirical_quantile(out.values, p));
  for (double v : out.values)
    if (v < 1e-12) ++out.tiny_count;
  return out;
}

}  // namespace ringlab
