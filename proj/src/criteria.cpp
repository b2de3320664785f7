#include "ringlab/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "ringlab/config.hpp"
#include "ringlab/experiments.hpp"
#include "ringlab/freeconv.hpp"
#include "ringlab/locallaw.hpp"
#include "ringlab/plots.hpp"
#include "ringlab/quadrature.hpp"
#include "ringlab/rmt.hpp"
#include "ringlab/singlering.hpp"

namespace ringlab {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double median(std::vector<double> v) { return empirical_quantile(std::move(v), 0.5); }

cplx sqrt_branch(cplx z, double c) { return std::sqrt(z - c) * std::sqrt(z + c); }

struct Ctx {
  const CriteriaOptions& opt;
  int id;
  CriterionResult& res;

  std::uint64_t seed(int k = 0) const { return derive_seed(opt.seed, std::uint64_t(id) * 1000 + k); }
  double threshold() const {
    auto it = opt.thresholds.find(id);
    return it == opt.thresholds.end() ? default_threshold(id) : it->second;
  }
  bool quick() const { return opt.quick; }
  void at_most(double measured) {
    res.measured = measured;
    res.threshold = threshold();
    res.relation = "<=";
    res.pass = measured <= res.threshold;
  }
  void at_least(double measured) {
    res.measured = measured;
    res.threshold = threshold();
    res.relation = ">=";
    res.pass = measured >= res.threshold;
  }
  void also(bool ok, const std::string& what) {
    if (!ok) res.pass = false;
    if (!res.detail.empty()) res.detail += "; ";
    res.detail += what + (ok ? "" : " FAILED");
  }
};

const Measure& uniform_law() {
  static const Measure m = Measure::uniform(0.5, 4.0);
  return m;
}

struct CachedRing {
  RingLaw ring;
  double seconds = 0.0;
};

const CachedRing& cached_ring(int grid_points, int threads) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, CachedRing> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({grid_points, threads});
  if (it != cache.end()) return it->second;
  RingLawOptions o;
  o.grid_points = grid_points;
  o.threads = threads;
  const auto t = Clock::now();
  CachedRing c{ring_law(uniform_law(), o), 0.0};
  c.seconds = seconds_since(t);
  return cache.emplace(std::make_pair(grid_points, threads), std::move(c)).first->second;
}

int ring_grid(const Ctx& c) { return c.quick() ? 41 : RingLawOptions{}.grid_points; }

void free_convolution_oracles(Ctx& c) {
  const auto t = Clock::now();
  const Measure ber = Measure::symmetric_bernoulli(1.0);
  const Measure sc = Measure::semicircle(2.0);
  double sup_b = 0.0, sup_s = 0.0;
  for (double eta : {0.1, 0.5, 1.0})
    for (int k = 0; k <= 12; ++k) {
      const double E = -3.0 + 0.5 * k;
      const cplx z(E, eta);
      sup_b = std::max(sup_b, std::abs(solve_subordination(ber, ber, {E, eta}).m + 1.0 / sqrt_branch(z, 2.0)));
      const cplx oracle = (-z + sqrt_branch(z, std::sqrt(8.0))) / 4.0;
      sup_s = std::max(sup_s, std::abs(solve_subordination(sc, sc, {E, eta}).m - oracle));
    }
  const double secs = seconds_since(t);
  c.at_most(std::max(sup_b, sup_s));
  c.also(true, "bernoulli " + g6(sup_b) + ", semicircle " + g6(sup_s));
  c.also(secs < 5.0, "runtime " + g6(secs) + " s < 5 s");
}

void translation(Ctx& c) {
  const Measure sc = Measure::semicircle(2.0);
  const Measure shift = Measure::point(0.7);
  double sup = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double E = -3.0 + 6.0 * k / 19.0;
    const double eta = 0.05 + 0.95 * (k % 4) / 3.0;
    const cplx w = cplx(E, eta) - 0.7;
    const cplx oracle = (-w + sqrt_branch(w, 2.0)) / 2.0;
    sup = std::max(sup, std::abs(solve_subordination(sc, shift, {E, eta}).m - oracle));
  }
  c.at_most(sup);
}

void annulus(Ctx& c) {
  const AnnulusBounds ab = annulus_bounds(uniform_law());
  // int x^-2 dx / 3.5 on (0.5, 4) = 0.5; int x^2 dx / 3.5 = 63.875 / 10.5
  const double a = std::sqrt(2.0), b = std::sqrt(63.875 / 10.5);
  c.at_most(std::max(std::abs(ab.a - a), std::abs(ab.b - b)));
  c.also(std::abs(a - 1.414214) <= 1e-6 && std::abs(b - 2.466441) <= 1e-6,
         "a = " + g6(ab.a) + ", b = " + g6(ab.b));
}

void log_potential_identity(Ctx& c) {
  const LogPotential L = log_potential(Measure::point(1.0), 1.0);
  c.at_most(std::abs(L.value));
  c.also(true, "error bound " + g6(L.error_bound));
}

void ring_normalization(Ctx& c) {
  const CachedRing& cr = cached_ring(ring_grid(c), c.opt.threads);
  double min_rho = 0.0;
  for (double v : cr.ring.density) min_rho = std::min(min_rho, v);
  c.at_most(std::abs(cr.ring.total_mass() - 1.0));
  c.also(min_rho >= -1e-6, "min rho " + g6(min_rho) + " >= -1e-6");
  if (!c.quick()) c.also(cr.seconds < 120.0, "runtime " + g6(cr.seconds) + " s < 120 s");
}

void spectrum_fraction(Ctx& c) {
  const auto t = Clock::now();
  const int N = c.quick() ? 100 : 500;
  const int seeds = c.quick() ? 2 : 5;
  const AnnulusBounds ab = annulus_bounds(uniform_law());
  const ModelSpec spec = model_from_laws(uniform_law(), N, c.seed());
  std::vector<SpectralSample> samples(seeds);
  parallel_for(seeds, c.opt.threads, [&](int k) { samples[k] = sample_model(spec, SampleRequest{}, k); });
  double frac = 0.0;
  for (const SpectralSample& s : samples) {
    int inside = 0;
    for (cplx l : s.eigenvalues)
      if (std::abs(l) >= ab.a - 0.15 && std::abs(l) <= ab.b + 0.15) ++inside;
    frac += double(inside) / N / seeds;
  }
  const double radii[] = {ab.a, ab.b};
  const std::string svg = svg_scatter(
      samples[0].eigenvalues, radii,
      {"Eigenvalues of UTV, T ~ uniform(0.5,4), N = " + std::to_string(N), "Re / Im", "", c.opt.config_hash});
  bool emitted = svg.find("<svg") != std::string::npos;
  if (!c.opt.output_dir.empty()) {
    fs::create_directories(c.opt.output_dir);
    std::ofstream os(fs::path(c.opt.output_dir) / "spectrum_annulus.svg", std::ios::binary);
    os << svg;
    emitted = emitted && static_cast<bool>(os);
  }
  const double secs = seconds_since(t);
  c.at_least(frac);
  c.also(emitted, "svg emitted");
  if (!c.quick()) c.also(secs < 60.0, "runtime " + g6(secs) + " s < 60 s");
}

void subordination_scaling(Ctx& c) {
  const Measure law = Measure::from_atoms({{1.0, 0.5}, {2.0, 0.5}});
  const int small = c.quick() ? 20 : 100, large = c.quick() ? 40 : 400;
  const int samples = c.quick() ? 10 : 200;
  const int reps = c.quick() ? 1 : 3;
  EstimateOptions eo;
  eo.threads = c.opt.threads;
  const UpperHalfPoint z{0.0, 1.0};
  std::vector<double> ratios;
  double defect = 0.0;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t s = c.seed(r);
    const SubordinationEstimate e1 = estimate_subordination(model_from_laws(law, small, s, &law), z, samples, eo);
    const SubordinationEstimate e2 = estimate_subordination(model_from_laws(law, large, s, &law), z, samples, eo);
    ratios.push_back(e2.resolvent_residual_A / e1.resolvent_residual_A);
    defect = std::max({defect, e1.consistency_defect, e2.consistency_defect});
  }
  c.at_most(median(ratios));
  c.also(defect <= 1e-10, "max consistency defect " + g6(defect) + " <= 1e-10");
}

void schwinger_dyson_scaling(Ctx& c) {
  const Measure one = Measure::point(1.0);
  const UpperHalfPoint z{0.0, 1.0};
  EstimateOptions eo;
  eo.threads = c.opt.threads;
  ModelSpec zero_b = model_from_laws(one, 50, c.seed(0));
  zero_b.B = std::vector<double>(50, 0.0);
  const double r0 = schwinger_dyson_residual(zero_b, z, 4, eo).residual;

  const int small = c.quick() ? 20 : 100, large = c.quick() ? 40 : 400;
  const int samples = c.quick() ? 10 : 400;
  const double r1 = schwinger_dyson_residual(model_from_laws(one, small, c.seed(1), &one), z, samples, eo).residual;
  const double r2 = schwinger_dyson_residual(model_from_laws(one, large, c.seed(1), &one), z, samples, eo).residual;
  c.at_most(r2 / r1);
  c.also(r0 == 0.0, "B = 0 residual " + g6(r0) + " == 0");
  c.also(true, "residuals " + g6(r1) + ", " + g6(r2));
}

void local_sv_law(Ctx& c) {
  const Measure one = Measure::point(1.0);
  const int N = c.quick() ? 200 : 1000;
  const int seeds = c.quick() ? 3 : 10;
  const double target = 2.0 / (kPi * std::sqrt(3.0));
  const ModelSpec spec = model_from_laws(one, N, c.seed(), &one);
  SampleRequest req;
  req.eigenvalues = false;
  std::vector<double> rel(seeds), theo(seeds);
  parallel_for(seeds, c.opt.threads, [&](int k) {
    const LocalLawReport r = local_sv_statistic(sample_model(spec, req, k).singular_values, one, one, 1.0, 0.05);
    rel[k] = std::abs(r.empirical - target) / target;
    theo[k] = r.theoretical;
  });
  c.at_most(median(rel));
  double worst = 0.0;
  for (double t : theo) worst = std::max(worst, std::abs(t - target) / target);
  c.also(worst <= 1e-6, "theoretical density within " + g6(worst) + " of 2/(pi sqrt 3)");
}

// int phi(x) sqrt(4 - x^2) / (2 pi) dx with x = 2 sin(theta).
double semicircle_pairing(const TestFunction& phi) {
  const double lo = std::asin(std::max(-1.0, phi.lo / 2.0));
  const double hi = std::asin(std::min(1.0, phi.hi / 2.0));
  const QuadratureRule r = composite_gauss_legendre(20, lo, hi, 400);
  double acc = 0.0;
  for (size_t i = 0; i < r.nodes.size(); ++i) {
    const double cs = std::cos(r.nodes[i]);
    acc += r.weights[i] * phi(2.0 * std::sin(r.nodes[i])) * 4.0 * cs * cs / (2.0 * kPi);
  }
  return acc;
}

void helffer_sjostrand(Ctx& c) {
  const TestFunction phi = smooth_bump(-1.0, -0.5, 0.5, 1.0, 3);
  const TransformFn d0 = [](cplx z) { return -1.0 / z; };
  const Measure scm = Measure::semicircle(2.0);
  const TransformFn sc = [&](cplx z) { return (-z + sqrt_branch(z, 2.0)) / 2.0; };
  const HsResult h0 = hs_integrate(phi, d0, 3, 1.0, 1e-3);
  const HsResult hs = hs_integrate(phi, sc, 3, 1.0, 1e-3);
  const TransformFn sum = [&](cplx z) { return d0(z) + sc(z); };
  const double lin = std::abs(hs_integrate(phi, sum, 3, 1.0, 1e-3).value - h0.value - hs.value);
  c.at_most(std::abs(hs.value - semicircle_pairing(phi)));
  c.also(std::abs(h0.value - 1.0) <= h0.error_bound,
         "delta_0 error " + g6(std::abs(h0.value - 1.0)) + " <= bound " + g6(h0.error_bound));
  c.also(lin <= 1e-10, "linearity defect " + g6(lin) + " <= 1e-10");
}

void esy(Ctx& c) {
  const TransformFn sc = [](cplx z) { return (-z + sqrt_branch(z, 2.0)) / 2.0; };
  const EsyWindow w = esy_window(sc, sc, 0.0, 0.01, 10.0);
  c.at_most(std::abs(w.estimate * kPi - 1.0));
}

void local_srt(Ctx& c) {
  const RingLaw& ring = cached_ring(ring_grid(c), c.opt.threads).ring;
  const int large = c.quick() ? 100 : 1000, small = c.quick() ? 50 : 250;
  const int seeds = c.quick() ? 3 : 10;
  auto run = [&](int N, std::vector<double>& rel, std::vector<double>& abs_diff) {
    const ModelSpec spec = model_from_laws(uniform_law(), N, c.seed(N));
    std::vector<LocalLawReport> reps(seeds);
    parallel_for(seeds, c.opt.threads, [&](int k) {
      reps[k] = local_srt_statistic(sample_model(spec, SampleRequest{}, k), ring, {1.9, 0.0}, 0.5);
    });
    for (const LocalLawReport& r : reps) {
      rel.push_back(std::abs(r.difference) / r.theoretical);
      abs_diff.push_back(std::abs(r.difference));
    }
  };
  std::vector<double> rel_l, abs_l, rel_s, abs_s;
  run(large, rel_l, abs_l);
  run(small, rel_s, abs_s);
  const double dl = median(abs_l), ds = median(abs_s);
  c.at_most(median(rel_l));
  c.also(dl <= ds, "median |diff| " + g6(dl) + " at N=" + std::to_string(large) + " <= " + g6(ds) +
                       " at N=" + std::to_string(small));
}

void delocalization(Ctx& c) {
  const Measure one = Measure::point(1.0);
  const int N = c.quick() ? 100 : 500;
  const int draws = c.quick() ? 1 : 3;
  SampleRequest req;
  req.eigenvalues = false;
  req.vectors = true;
  auto worst = [&](const Measure* b, int count) {
    ModelSpec spec = model_from_laws(one, N, c.seed(b ? 0 : 1), b);
    spec.a_is_diagonal = true;
    std::vector<double> m(count);
    parallel_for(count, c.opt.threads, [&](int k) {
      const DelocalizationStats d = delocalization_stats(sample_model(spec, req, k), 1.0, 0.2);
      m[k] = std::max(d.max_u_component_sq, d.max_v_component_sq);
    });
    return *std::max_element(m.begin(), m.end());
  };
  const double w = worst(&one, draws);
  const double control = worst(nullptr, 1);
  c.at_most(w);
  c.also(std::abs(control - 1.0) <= 1e-9, "control without B " + g6(control) + " == 1");
}

void hadamard(Ctx& c) {
  const int N = c.quick() ? 300 : 2000;
  std::mt19937_64 rng(c.seed());
  const Eigen::VectorXd ev = goe_eigenvalues(N, rng);
  const TransformFn diff = [&](cplx z) {
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += 1.0 / (ev(i) - z);
    return s / double(N) - (-z + sqrt_branch(z, 2.0)) / 2.0;
  };
  double delta = 0.0;
  for (int k = 0; k < 64; ++k) {
    const cplx u = std::polar(1.0, 2.0 * kPi * k / 64);
    delta = std::max(delta, std::abs(diff(cplx(0.0, 1.0) * (std::numbers::e + u) / (std::numbers::e - u))));
  }
  const HadamardReport h = hadamard_check(diff, 1.0, delta * (1.0 + 1e-12), 2.0);
  c.at_most(h.inner_max / h.inner_bound);
  c.also(h.holds, "delta " + g6(h.delta) + ", inner max " + g6(h.inner_max) + ", bound " + g6(h.inner_bound));
}

const char* kProbeConfig = R"(seed: 7
experiments:
  - kind: simulate-spectrum
    name: spectrum
    law: uniform(0.5,4)
    N: 60
    seeds: 3
    svg: false
  - kind: subordination-residual
    name: subordination
    law_a: atoms(1:0.5,2:0.5)
    law_b: atoms(1:0.5,2:0.5)
    N: [16, 32]
    samples: 6
  - kind: local-sv
    name: local_sv
    law_a: point(1)
    law_b: point(1)
    N: 80
    E: 1
    eta: 0.1
    seeds: 3
  - kind: delocalization
    name: deloc
    law_a: point(1)
    law_b: point(1)
    N: 40
    E: 1
    seeds: 2
)";

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void determinism(Ctx& c) {
  const std::vector<int> probes{5, 6, 7, 8, 9, 12, 13, 14};
  const int thread_counts[] = {1, 2, 8};
  std::vector<std::string> tables;
  std::vector<std::map<std::string, std::string>> files;
  const fs::path base = fs::temp_directory_path() /
                        ("ringlab_det_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  const Config probe = parse_config(kProbeConfig, "determinism probe");
  for (int t : thread_counts) {
    CriteriaOptions o;
    o.threads = t;
    o.seed = c.opt.seed;
    o.quick = true;
    std::ostringstream os;
    write_criteria_csv(run_criteria(probes, o), probe.hash, os);
    tables.push_back(os.str());

    RunOptions ro;
    ro.output_dir = (base / std::to_string(t)).string();
    ro.threads = t;
    run_experiments(probe, ro);
    std::map<std::string, std::string> f;
    for (const auto& entry : fs::directory_iterator(ro.output_dir))
      if (entry.path().extension() == ".csv") f[entry.path().filename().string()] = read_file(entry.path());
    files.push_back(std::move(f));
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  int mismatches = 0;
  for (size_t i = 1; i < tables.size(); ++i) {
    if (tables[i] != tables[0]) ++mismatches;
    if (files[i] != files[0]) ++mismatches;
  }
  c.at_most(mismatches);
  c.also(!files[0].empty(), std::to_string(files[0].size()) + " probe CSVs at 1, 2 and 8 threads");
}

using CriterionFn = void (*)(Ctx&);

struct Entry {
  const char* name;
  double threshold;
  CriterionFn fn;
};

const Entry kCriteria[kCriterionCount] = {
    {"free convolution oracle match", 1e-8, free_convolution_oracles},
    {"translation exactness", 1e-10, translation},
    {"annulus bounds", 1e-6, annulus},
    {"log-potential identity", 1e-3, log_potential_identity},
    {"ring normalization", 0.02, ring_normalization},
    {"spectrum inside the annulus", 0.98, spectrum_fraction},
    {"matrix subordination residual scaling", 0.6, subordination_scaling},
    {"Schwinger-Dyson residual", 0.7, schwinger_dyson_scaling},
    {"local singular value law", 0.1, local_sv_law},
    {"Helffer-Sjostrand integration", 1e-3, helffer_sjostrand},
    {"ESY window", 0.05, esy},
    {"local single ring statistic", 0.25, local_srt},
    {"delocalization", 0.05, delocalization},
    {"Hadamard three circles check", 1.0, hadamard},
    {"determinism across thread counts", 0.0, determinism},
};

const Entry& entry(int id) {
  require(id >= 1 && id <= kCriterionCount, ErrorCode::InvalidArgument,
          "criterion id must be in 1.." + std::to_string(kCriterionCount));
  return kCriteria[id - 1];
}

}  // namespace

const char* criterion_name(int id) { return entry(id).name; }

double default_threshold(int id) { return entry(id).threshold; }

const std::vector<std::string>& bundle_names() {
  static const std::vector<std::string> names{"analytic", "ring", "simulation", "matrix", "full"};
  return names;
}

std::vector<int> bundle_criteria(const std::string& bundle) {
  if (bundle == "analytic") return {1, 2, 3, 4, 10, 11};
  if (bundle == "ring") return {3, 4, 5};
  if (bundle == "simulation") return {6, 9, 12, 13, 14};
  if (bundle == "matrix") return {7, 8};
  if (bundle == "full") {
    std::vector<int> all(kCriterionCount);
    for (int i = 0; i < kCriterionCount; ++i) all[i] = i + 1;
    return all;
  }
  fail(ErrorCode::Config, "unknown bundle '" + bundle + "' (analytic, ring, simulation, matrix, full)");
}

CriterionResult run_criterion(int id, const CriteriaOptions& options) {
  const Entry& e = entry(id);
  CriterionResult r;
  r.id = id;
  r.name = e.name;
  Ctx c{options, id, r};
  r.threshold = c.threshold();
  const auto t = Clock::now();
  try {
    e.fn(c);
  } catch (const Error& err) {
    r.pass = false;
    r.numeric_failure = true;
    r.measured = std::nan("");
    r.detail = std::string(error_code_name(err.code())) + ": " + err.what();
  }
  r.seconds = seconds_since(t);
  return r;
}

std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const CriteriaOptions& options,
                                          const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, options));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string summary_line(const CriterionResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %2d ", r.pass ? "PASS" : "FAIL", r.id);
  std::string s = buf + r.name + ": " + g6(r.measured) + " " + r.relation + " " + g6(r.threshold);
  if (!r.detail.empty()) s += " (" + r.detail + ")";
  std::snprintf(buf, sizeof buf, " [%.1f s]", r.seconds);
  return s + buf;
}

void write_criteria_csv(const std::vector<CriterionResult>& results, const std::string& config_hash,
                        std::ostream& out) {
  out << hash_line(config_hash) << '\n' << "id,name,measured,threshold,pass\n";
  for (const CriterionResult& r : results) {
    char m[32], t[32];
    std::snprintf(m, sizeof m, "%.17g", r.measured);
    std::snprintf(t, sizeof t, "%.17g", r.threshold);
    out << r.id << ',' << r.name << ',' << m << ',' << t << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

}  // namespace ringlab
