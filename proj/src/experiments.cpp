#include "ringlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ringlab/freeconv.hpp"
#include "ringlab/locallaw.hpp"
#include "ringlab/plots.hpp"
#include "ringlab/quadrature.hpp"
#include "ringlab/rmt.hpp"
#include "ringlab/singlering.hpp"

namespace ringlab {

namespace {

namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median(std::vector<double> v) { return empirical_quantile(std::move(v), 0.5); }

class Writer {
 public:
  Writer(fs::path dir, std::string hash, ExperimentOutcome& out)
      : dir_(std::move(dir)), hash_(std::move(hash)), out_(out) {}

  std::ofstream open(const std::string& file) {
    const fs::path p = dir_ / file;
    std::ofstream os(p, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + p.string());
    out_.artifacts.push_back(file);
    return os;
  }

  std::ofstream csv(const std::string& file) {
    std::ofstream os = open(file);
    os << hash_line(hash_) << '\n';
    return os;
  }

  void text(const std::string& file, const std::string& body) { open(file) << body; }

  const std::string& hash() const { return hash_; }

 private:
  fs::path dir_;
  std::string hash_;
  ExperimentOutcome& out_;
};

cplx sqrt_branch(cplx z, double c) { return std::sqrt(z - c) * std::sqrt(z + c); }

// Closed-form transform of mu [+] nu when one is known.
std::optional<TransformFn> convolution_oracle(const Measure& mu, const Measure& nu) {
  const auto& a = mu.law();
  const auto& b = nu.law();
  if (a && b && a->kind == LawKind::SymmetricBernoulli && b->kind == LawKind::SymmetricBernoulli &&
      a->p1 == b->p1) {
    const double c = 2.0 * a->p1;
    return TransformFn([c](cplx z) { return -1.0 / sqrt_branch(z, c); });
  }
  if (a && b && a->kind == LawKind::Semicircle && b->kind == LawKind::Semicircle) {
    const double R2 = a->p1 * a->p1 + b->p1 * b->p1;
    return TransformFn([R2](cplx z) { return (-z + sqrt_branch(z, std::sqrt(R2))) * 2.0 / R2; });
  }
  auto point = [](const Measure& m) -> std::optional<double> {
    if (m.segments().empty() && m.atoms().size() == 1 && m.atoms()[0].weight == 1.0)
      return m.atoms()[0].location;
    return std::nullopt;
  };
  if (auto c = point(nu)) return TransformFn([mu, c = *c](cplx z) { return transform(mu, z - c); });
  if (auto c = point(mu)) return TransformFn([nu, c = *c](cplx z) { return transform(nu, z - c); });
  return std::nullopt;
}

const Measure& need(const std::optional<LawSpec>& l) {
  require(l.has_value(), ErrorCode::Config, "experiment needs a law");
  return l->measure;
}

void freeconv_check(const ExperimentConfig& e, Writer& w, ExperimentOutcome& out) {
  const Measure& mu = need(e.law);
  const Measure& nu = need(e.law_b);
  const auto oracle = convolution_oracle(mu, nu);
  const double tol = e.tolerance.value_or(1e-8);
  auto os = w.csv(e.name + ".csv");
  os << "E,eta,re_m,im_m,re_oracle,im_oracle,abs_err,residual,iterations\n";
  double sup = 0.0;
  for (double eta : e.eta)
    for (double E : e.E) {
      const SubordinationResult r = solve_subordination(mu, nu, {E, eta});
      os << g17(E) << ',' << g17(eta) << ',' << g17(r.m.real()) << ',' << g17(r.m.imag()) << ',';
      if (oracle) {
        const cplx o = (*oracle)(cplx(E, eta));
        const double err = std::abs(r.m - o);
        sup = std::max(sup, err);
        os << g17(o.real()) << ',' << g17(o.imag()) << ',' << g17(err);
      } else {
        os << ",,";
      }
      os << ',' << g17(*std::max_element(r.residuals.begin(), r.residuals.end())) << ','
         << r.iterations << '\n';
    }
  out.payload["has_oracle"] = oracle.has_value();
  if (oracle) {
    out.payload["sup_abs_err"] = sup;
    out.payload["tolerance"] = tol;
    out.passed = sup <= tol;
  }
}

void ring_experiment(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  RingLawOptions o;
  o.grid_points = e.grid_points;
  o.edge_offset = e.edge_offset;
  o.h = e.h;
  o.threads = threads;
  const RingLaw ring = ring_law(need(e.law), o);
  {
    auto os = w.csv(e.name + ".csv");
    write_ring_csv(ring, os);
  }
  double min_rho = 0.0;
  for (double v : ring.density) min_rho = std::min(min_rho, v);
  out.payload["a"] = ring.a;
  out.payload["b"] = ring.b;
  out.payload["total_mass"] = ring.total_mass();
  out.payload["min_density"] = min_rho;
  out.passed = std::abs(ring.total_mass() - 1.0) <= 0.02 && min_rho >= -1e-6;
  if (e.svg) {
    PlotSeries s{"rho(r)", ring.r_grid, ring.density, false};
    w.text(e.name + ".svg",
           svg_line_plot({s}, {"Radial density of the ring law, " + e.law->text, "r", "rho", w.hash()}));
  }
}

void simulate_spectrum(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  const Measure& law = need(e.law);
  const AnnulusBounds ab = annulus_bounds(law);
  out.payload["a"] = ab.a;
  out.payload["b"] = ab.b;
  nlohmann::json rows = nlohmann::json::array();
  for (int N : e.N) {
    const ModelSpec spec = model_from_laws(law, N, e.seed);
    std::vector<SpectralSample> samples(e.seeds);
    parallel_for(e.seeds, threads, [&](int k) { samples[k] = sample_model(spec, SampleRequest{}, k); });
    std::vector<double> fractions;
    for (int k = 0; k < e.seeds; ++k) {
      const SpectralSample& s = samples[k];
      auto os = w.csv(e.name + "_N" + std::to_string(N) + "_s" + std::to_string(k) + ".csv");
      write_sample_csv(s, os);
      int inside = 0;
      for (cplx l : s.eigenvalues)
        if (std::abs(l) >= ab.a - 0.15 && std::abs(l) <= ab.b + 0.15) ++inside;
      fractions.push_back(double(inside) / N);
      out.seeds.push_back(s.seed_used);
    }
    double mean = 0.0;
    for (double f : fractions) mean += f / fractions.size();
    rows.push_back({{"N", N}, {"fraction_in_annulus", mean}});
    if (e.svg) {
      const double radii[] = {ab.a, ab.b};
      w.text(e.name + "_N" + std::to_string(N) + ".svg",
             svg_scatter(samples[0].eigenvalues, radii,
                         {"Eigenvalues of UTV, T ~ " + e.law->text + ", N = " + std::to_string(N),
                          "Re / Im", "", w.hash()}));
    }
  }
  out.payload["sizes"] = rows;
}

void subordination_residual(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  const Measure& la = need(e.law);
  const Measure& lb = need(e.law_b);
  auto os = w.csv(e.name + ".csv");
  os << "N,rep,seed,residual_A,residual_B,consistency_defect,re_S_A,im_S_A,re_S_B,im_S_B,se_S_A,se_S_B,"
        "re_m,im_m\n";
  EstimateOptions opt;
  opt.threads = threads;
  std::vector<double> xs, ys;
  double worst_defect = 0.0;
  for (int N : e.N) {
    std::vector<double> res;
    for (int r = 0; r < e.repetitions; ++r) {
      const ModelSpec spec = model_from_laws(la, N, derive_seed(e.seed, r), &lb);
      const SubordinationEstimate s = estimate_subordination(spec, UpperHalfPoint::from(e.z), e.samples, opt);
      os << N << ',' << r << ',' << spec.seed << ',' << g17(s.resolvent_residual_A) << ','
         << g17(s.resolvent_residual_B) << ',' << g17(s.consistency_defect) << ',' << g17(s.S_A_emp.real())
         << ',' << g17(s.S_A_emp.imag()) << ',' << g17(s.S_B_emp.real()) << ',' << g17(s.S_B_emp.imag())
         << ',' << g17(s.se_S_A) << ',' << g17(s.se_S_B) << ',' << g17(s.m_H_emp.real()) << ','
         << g17(s.m_H_emp.imag()) << '\n';
      res.push_back(s.resolvent_residual_A);
      worst_defect = std::max(worst_defect, s.consistency_defect);
      out.seeds.push_back(spec.seed);
      if (!s.im_s_ok) out.passed = false;
    }
    xs.push_back(N);
    ys.push_back(median(res));
  }
  out.payload["max_consistency_defect"] = worst_defect;
  out.payload["median_residual_A"] = ys;
  out.passed = out.passed && worst_defect <= 1e-10;
  if (e.svg)
    w.text(e.name + ".svg", svg_line_plot({{"median residual_A", xs, ys, true}},
                                          {"Subordination residual against N", "N", "residual", w.hash()},
                                          true, true));
}

void schwinger_dyson(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  const Measure& la = need(e.law);
  const Measure& lb = need(e.law_b);
  auto os = w.csv(e.name + ".csv");
  os << "N,seed,residual,standard_error\n";
  EstimateOptions opt;
  opt.threads = threads;
  std::vector<double> xs, ys;
  for (int N : e.N) {
    const ModelSpec spec = model_from_laws(la, N, e.seed, &lb);
    const SchwingerDysonResult r = schwinger_dyson_residual(spec, UpperHalfPoint::from(e.z), e.samples, opt);
    os << N << ',' << spec.seed << ',' << g17(r.residual) << ',' << g17(r.standard_error) << '\n';
    xs.push_back(N);
    ys.push_back(r.residual);
  }
  out.seeds.push_back(e.seed);
  out.payload["residual"] = ys;
  if (e.svg)
    w.text(e.name + ".svg", svg_line_plot({{"residual", xs, ys, true}},
                                          {"Schwinger-Dyson residual against N", "N", "residual", w.hash()},
                                          true, true));
}

void report_rows(std::vector<LocalLawReport>& reps, const std::optional<double>& tol, Writer& w,
                 const std::string& name, ExperimentOutcome& out) {
  auto os = w.csv(name + ".csv");
  write_report_header(os);
  nlohmann::json rows = nlohmann::json::array();
  for (LocalLawReport& r : reps) {
    if (tol) {
      r.tolerance = *tol;
      r.pass = std::abs(r.difference) <= r.tolerance * std::abs(r.theoretical);
    }
    write_report_row(r, os);
    out.passed = out.passed && r.pass;
    rows.push_back({{"N", r.N}, {"empirical", r.empirical}, {"theoretical", r.theoretical}, {"pass", r.pass},
                    {"in_window", r.in_window}});
    out.seeds.insert(out.seeds.end(), r.seeds.begin(), r.seeds.end());
  }
  out.payload["reports"] = rows;
}

void local_srt(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  const Measure& law = need(e.law);
  RingLawOptions o;
  o.grid_points = e.grid_points;
  o.threads = threads;
  const RingLaw ring = ring_law(law, o);
  std::vector<LocalLawReport> reps;
  for (int N : e.N) {
    const ModelSpec spec = model_from_laws(law, N, e.seed);
    const double eps = e.eps > 0.0 ? e.eps : srt_scale(N, e.alpha);
    std::vector<LocalLawReport> part(e.seeds);
    SampleRequest req;
    parallel_for(e.seeds, threads, [&](int k) {
      part[k] = local_srt_statistic(sample_model(spec, req, k), ring, e.z0, eps);
    });
    reps.insert(reps.end(), part.begin(), part.end());
  }
  report_rows(reps, e.tolerance, w, e.name, out);
}

void local_sv(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  const Measure& la = need(e.law);
  const Measure& lb = need(e.law_b);
  std::vector<LocalLawReport> reps;
  for (int N : e.N) {
    const ModelSpec spec = model_from_laws(la, N, e.seed, &lb);
    SampleRequest req;
    req.eigenvalues = false;
    std::vector<SpectralSample> samples(e.seeds);
    parallel_for(e.seeds, threads, [&](int k) { samples[k] = sample_model(spec, req, k); });
    for (const SpectralSample& s : samples)
      for (double E : e.E)
        for (double eta : e.eta) {
          LocalLawReport r = local_sv_statistic(s.singular_values, la, lb, E, eta);
          r.seeds = {s.seed_used};
          reps.push_back(r);
        }
  }
  report_rows(reps, e.tolerance, w, e.name, out);
}

void delocalization(const ExperimentConfig& e, int threads, Writer& w, ExperimentOutcome& out) {
  const Measure& la = need(e.law);
  auto os = w.csv(e.name + ".csv");
  os << "N,seed,E,width,count,max_u_sq,max_v_sq\n";
  nlohmann::json rows = nlohmann::json::array();
  for (int N : e.N) {
    ModelSpec spec = model_from_laws(la, N, e.seed, e.law_b ? &e.law_b->measure : nullptr);
    spec.a_is_diagonal = true;
    SampleRequest req;
    req.eigenvalues = false;
    req.vectors = true;
    std::vector<std::vector<DelocalizationStats>> stats(e.seeds);
    std::vector<std::uint64_t> used(e.seeds);
    parallel_for(e.seeds, threads, [&](int k) {
      const SpectralSample s = sample_model(spec, req, k);
      used[k] = s.seed_used;
      for (double E : e.E) stats[k].push_back(delocalization_stats(s, E, e.width));
    });
    for (int k = 0; k < e.seeds; ++k) {
      out.seeds.push_back(used[k]);
      for (size_t j = 0; j < e.E.size(); ++j) {
        const DelocalizationStats& d = stats[k][j];
        os << N << ',' << used[k] << ',' << g17(e.E[j]) << ',' << g17(e.width) << ',' << d.count_in_window
           << ',' << g17(d.max_u_component_sq) << ',' << g17(d.max_v_component_sq) << '\n';
        rows.push_back({{"N", N}, {"E", e.E[j]}, {"max_u_sq", d.max_u_component_sq},
                        {"max_v_sq", d.max_v_component_sq}, {"count", d.count_in_window}});
      }
    }
  }
  out.payload["windows"] = rows;
}

void hadamard(const ExperimentConfig& e, Writer& w, ExperimentOutcome& out) {
  const int N = e.N.front();
  std::mt19937_64 rng(e.seed);
  const Eigen::VectorXd ev = goe_eigenvalues(N, rng);
  const Measure sc = Measure::semicircle(2.0);
  const TransformFn diff = [&](cplx z) {
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += 1.0 / (ev(i) - z);
    return s / static_cast<double>(N) - transform(sc, z);
  };
  const double e1 = std::numbers::e;
  double delta = 0.0;
  for (int k = 0; k < 64; ++k) {
    const cplx u = std::polar(1.0, 2.0 * std::numbers::pi * k / 64);
    delta = std::max(delta, std::abs(diff(cplx(0.0, e.a) * (e1 + u) / (e1 - u))));
  }
  const HadamardReport h = hadamard_check(diff, e.a, delta * (1.0 + 1e-12), e.tv_norm);
  auto os = w.csv(e.name + ".csv");
  os << "N,seed,a,delta,c,r,inner_bound,inner_max,convexity_bound,holds\n";
  os << N << ',' << e.seed << ',' << g17(e.a) << ',' << g17(h.delta) << ',' << g17(h.c) << ',' << g17(h.r)
     << ',' << g17(h.inner_bound) << ',' << g17(h.inner_max) << ',' << g17(h.convexity_bound) << ','
     << (h.holds ? "true" : "false") << '\n';
  out.seeds.push_back(e.seed);
  out.payload["delta"] = h.delta;
  out.payload["inner_bound"] = h.inner_bound;
  out.payload["inner_max"] = h.inner_max;
  out.passed = h.holds;
}

}  // namespace

const char* software_version() { return "0.1.0"; }

std::string hash_line(const std::string& config_hash) { return "# config_hash: " + config_hash; }

bool RunRecord::numeric_failure() const {
  return std::any_of(experiments.begin(), experiments.end(),
                     [](const ExperimentOutcome& e) { return e.numeric_failure; });
}

bool RunRecord::all_passed() const {
  return std::all_of(experiments.begin(), experiments.end(), [](const ExperimentOutcome& e) {
    return e.passed && !e.numeric_failure;
  });
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["software_version"] = version;
  j["wall_seconds"] = wall_seconds;
  j["experiments"] = nlohmann::json::array();
  nlohmann::json ledger = nlohmann::json::array();
  for (const ExperimentOutcome& e : experiments) {
    j["experiments"].push_back({{"name", e.name},
                                {"kind", e.kind},
                                {"passed", e.passed},
                                {"numeric_failure", e.numeric_failure},
                                {"error", e.error},
                                {"artifacts", e.artifacts},
                                {"results", e.payload},
                                {"seeds", e.seeds}});
    ledger.push_back({{"experiment", e.name}, {"seeds", e.seeds}});
  }
  j["seed_ledger"] = ledger;
  return j;
}

RunRecord run_experiments(const Config& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = options.output_dir.empty() ? fs::path(config.output) : fs::path(options.output_dir);
  const int threads = options.threads > 0 ? options.threads : config.threads;
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::Io, "cannot create output directory " + dir.string());

  RunRecord rec;
  rec.config_hash = config.hash;
  rec.version = software_version();
  for (const ExperimentConfig& e : config.experiments) {
    ExperimentOutcome out;
    out.name = e.name;
    out.kind = kind_name(e.kind);
    Writer w(dir, config.hash, out);
    try {
      switch (e.kind) {
        case ExperimentKind::FreeconvCheck: freeconv_check(e, w, out); break;
        case ExperimentKind::RingLaw: ring_experiment(e, threads, w, out); break;
        case ExperimentKind::SimulateSpectrum: simulate_spectrum(e, threads, w, out); break;
        case ExperimentKind::SubordinationResidual: subordination_residual(e, threads, w, out); break;
        case ExperimentKind::SchwingerDyson: schwinger_dyson(e, threads, w, out); break;
        case ExperimentKind::LocalSrt: local_srt(e, threads, w, out); break;
        case ExperimentKind::LocalSv: local_sv(e, threads, w, out); break;
        case ExperimentKind::Delocalization: delocalization(e, threads, w, out); break;
        case ExperimentKind::Hadamard: hadamard(e, w, out); break;
      }
    } catch (const Error& err) {
      if (err.code() == ErrorCode::Io) throw;
      out.numeric_failure = true;
      out.passed = false;
      out.error = std::string(error_code_name(err.code())) + ": " + err.what();
    }
    rec.experiments.push_back(std::move(out));
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json manifest;
  manifest["config_hash"] = config.hash;
  manifest["artifacts"] = nlohmann::json::array();
  for (const ExperimentOutcome& e : rec.experiments)
    for (const std::string& a : e.artifacts) manifest["artifacts"].push_back(a);
  manifest["artifacts"].push_back("run_record.json");
  std::ofstream(dir / "run_record.json") << rec.to_json().dump(2) << '\n';
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return rec;
}

}  // namespace ringlab
