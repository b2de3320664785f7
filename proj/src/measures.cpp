#include "ringlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ringlab/quadrature.hpp"

namespace ringlab {

namespace {

constexpr double kPi = std::numbers::pi;

const char* kind_name(LawKind kind) {
  switch (kind) {
    case LawKind::Semicircle: return "semicircle";
    case LawKind::Arcsine: return "arcsine";
    case LawKind::Uniform: return "uniform";
    case LawKind::SymmetricBernoulli: return "bernoulli";
  }
  return "?";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\n\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "not a number: '" + t + "'");
  }
  require(used == t.size(), ErrorCode::InvalidArgument, "not a number: '" + t + "'");
  return v;
}

// Splits "name(a,b,...)" into name and argument strings.
std::pair<std::string, std::vector<std::string>> split_call(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  require(open != std::string::npos && t.back() == ')', ErrorCode::InvalidArgument,
          "law must look like name(args): '" + t + "'");
  std::string name = trim(t.substr(0, open));
  std::vector<std::string> args;
  std::stringstream ss(t.substr(open + 1, t.size() - open - 2));
  std::string item;
  while (std::getline(ss, item, ',')) args.push_back(trim(item));
  return {name, args};
}

cplx centered_sqrt(cplx z, double h) { return std::sqrt(z - h) * std::sqrt(z + h); }

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Transform of the unsymmetrized base law.
cplx base_transform(const NamedLaw& law, cplx w, int order) {
  switch (law.kind) {
    case LawKind::Semicircle: {
      const double R = law.p1;
      const cplx s = centered_sqrt(w, R);
      require(std::abs(s) > 0.0, ErrorCode::Pole, "transform evaluated at a support edge");
      const double c = 2.0 / (R * R);
      if (order == 0) return c * (-w + s);
      if (order == 1) return c * (-1.0 + w / s);
      return -2.0 / (s * s * s);
    }
    case LawKind::Arcsine: {
      const cplx s = centered_sqrt(w, law.p1);
      require(std::abs(s) > 0.0, ErrorCode::Pole, "transform evaluated at a support edge");
      if (order == 0) return -1.0 / s;
      if (order == 1) return w / (s * s * s);
      return (s * s - 3.0 * w * w) / (s * s * s * s * s);
    }
    case LawKind::Uniform: {
      const double lo = law.p1, hi = law.p2, L = hi - lo;
      const cplx a = lo - w, b = hi - w;
      require(std::abs(a) > 0.0 && std::abs(b) > 0.0, ErrorCode::Pole,
              "transform evaluated at a support edge");
      if (order == 0) return (std::log(b) - std::log(a)) / L;
      if (order == 1) return (1.0 / a - 1.0 / b) / L;
      return (1.0 / (a * a) - 1.0 / (b * b)) / L;
    }
    case LawKind::SymmetricBernoulli: {
      const double c = law.p1;
      const cplx a = c - w, b = -c - w;
      require(std::abs(a) > 0.0 && std::abs(b) > 0.0, ErrorCode::Pole,
              "transform evaluated at an atom");
      const double f = factorial(order);
      return 0.5 * f * (1.0 / std::pow(a, order + 1) + 1.0 / std::pow(b, order + 1));
    }
  }
  return 0.0;
}

bool law_is_symmetric(const NamedLaw& law) {
  if (law.symmetrized) return true;
  if (law.kind == LawKind::Uniform) return law.p1 == -law.p2;
  return true;
}

void validate_law(const NamedLaw& law) {
  switch (law.kind) {
    case LawKind::Semicircle:
    case LawKind::Arcsine:
      require(law.p1 > 0.0 && std::isfinite(law.p1), ErrorCode::InvalidArgument,
              std::string(kind_name(law.kind)) + " needs a positive finite radius");
      break;
    case LawKind::Uniform:
      require(std::isfinite(law.p1) && std::isfinite(law.p2) && law.p1 < law.p2,
              ErrorCode::InvalidArgument, "uniform(lo,hi) needs finite lo < hi");
      break;
    case LawKind::SymmetricBernoulli:
      require(std::isfinite(law.p1) && law.p1 >= 0.0, ErrorCode::InvalidArgument,
              "bernoulli(c) needs finite c >= 0");
      break;
  }
}

const char* rule_name(SegmentRule rule) {
  return rule == SegmentRule::Angle ? "angle" : "gauss-legendre";
}

SegmentRule rule_from_name(const std::string& name) {
  if (name == "angle") return SegmentRule::Angle;
  if (name == "gauss-legendre") return SegmentRule::GaussLegendre;
  fail(ErrorCode::InvalidArgument, "unknown segment rule '" + name + "'");
}

Segment mirror(const Segment& s) {
  Segment m = Segment::make(-s.hi, -s.lo, s.rule, static_cast<int>(s.nodes.size()));
  m.density.assign(s.density.rbegin(), s.density.rend());
  return m;
}

}  // namespace

std::string NamedLaw::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << kind_name(kind) << '(' << p1;
  if (kind == LawKind::Uniform) os << ',' << p2;
  os << ')';
  return symmetrized ? "symmetrized-" + os.str() : os.str();
}

NamedLaw NamedLaw::parse(const std::string& text) {
  std::string t = trim(text);
  bool sym = false;
  if (t.rfind("symmetrized-", 0) == 0) {
    sym = true;
    t = t.substr(12);
  }
  auto [name, args] = split_call(t);
  NamedLaw law;
  law.symmetrized = sym;
  auto want = [&](size_t n) {
    require(args.size() == n, ErrorCode::InvalidArgument,
            name + " expects " + std::to_string(n) + " argument(s)");
  };
  if (name == "semicircle") {
    want(1);
    law.kind = LawKind::Semicircle;
  } else if (name == "arcsine") {
    want(1);
    law.kind = LawKind::Arcsine;
  } else if (name == "uniform") {
    want(2);
    law.kind = LawKind::Uniform;
  } else if (name == "bernoulli") {
    want(1);
    law.kind = LawKind::SymmetricBernoulli;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown law '" + name + "'");
  }
  law.p1 = parse_double(args[0]);
  if (args.size() > 1) law.p2 = parse_double(args[1]);
  validate_law(law);
  if (law_is_symmetric({law.kind, law.p1, law.p2, false})) law.symmetrized = false;
  return law;
}

Segment Segment::make(double lo, double hi, SegmentRule rule, int n) {
  require(lo < hi, ErrorCode::InvalidArgument, "segment needs lo < hi");
  const auto& g = gauss_legendre(n);
  Segment s;
  s.lo = lo;
  s.hi = hi;
  s.rule = rule;
  s.nodes.resize(n);
  s.weights.resize(n);
  s.density.assign(n, 0.0);
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    if (rule == SegmentRule::GaussLegendre) {
      s.nodes[i] = c + h * g.nodes[i];
      s.weights[i] = h * g.weights[i];
    } else {
      const double a = 0.5 * kPi * g.nodes[i];
      s.nodes[i] = c + h * std::sin(a);
      s.weights[i] = g.weights[i] * h * 0.5 * kPi * std::cos(a);
    }
  }
  return s;
}

Measure Measure::point(double c) { return from_atoms({{c, 1.0}}); }

Measure Measure::from_atoms(std::vector<Atom> atoms) {
  for (const auto& a : atoms)
    require(std::isfinite(a.location) && std::isfinite(a.weight), ErrorCode::InvalidArgument,
            "atoms must be finite");
  Measure m;
  m.atoms_ = std::move(atoms);
  m.canonicalize();
  return m;
}

Measure Measure::from_parts(std::vector<Atom> atoms, std::vector<Segment> segments,
                            std::optional<NamedLaw> law) {
  Measure m;
  m.atoms_ = std::move(atoms);
  m.segments_ = std::move(segments);
  m.law_ = law;
  m.canonicalize();
  return m;
}

Measure Measure::named(const NamedLaw& law, int nodes) {
  validate_law(law);
  require(nodes >= 2, ErrorCode::InvalidArgument, "need at least two quadrature nodes");
  NamedLaw base = law;
  base.symmetrized = false;
  Measure m;
  switch (law.kind) {
    case LawKind::Semicircle: {
      const double R = law.p1;
      Segment s = Segment::make(-R, R, SegmentRule::Angle, nodes);
      for (int i = 0; i < nodes; ++i) {
        const double x = s.nodes[i];
        s.density[i] = 2.0 * std::sqrt(std::max(0.0, (R - x) * (x + R))) / (kPi * R * R);
      }
      m.segments_.push_back(std::move(s));
      break;
    }
    case LawKind::Arcsine: {
      const double h = law.p1;
      Segment s = Segment::make(-h, h, SegmentRule::Angle, nodes);
      for (int i = 0; i < nodes; ++i) {
        const double x = s.nodes[i];
        s.density[i] = 1.0 / (kPi * std::sqrt((h - x) * (x + h)));
      }
      m.segments_.push_back(std::move(s));
      break;
    }
    case LawKind::Uniform: {
      Segment s = Segment::make(law.p1, law.p2, SegmentRule::GaussLegendre, nodes);
      std::fill(s.density.begin(), s.density.end(), 1.0 / (law.p2 - law.p1));
      m.segments_.push_back(std::move(s));
      break;
    }
    case LawKind::SymmetricBernoulli:
      m.atoms_ = {{law.p1, 0.5}, {-law.p1, 0.5}};
      break;
  }
  m.law_ = base;
  m.canonicalize();
  if (law.symmetrized) return symmetrize(m);
  return m;
}

Measure Measure::semicircle(double radius, int nodes) {
  return named({LawKind::Semicircle, radius, 0.0, false}, nodes);
}
Measure Measure::arcsine(double half_width, int nodes) {
  return named({LawKind::Arcsine, half_width, 0.0, false}, nodes);
}
Measure Measure::uniform(double lo, double hi, int nodes) {
  return named({LawKind::Uniform, lo, hi, false}, nodes);
}
Measure Measure::symmetric_bernoulli(double c) {
  return named({LawKind::SymmetricBernoulli, c, 0.0, false});
}

Measure Measure::combine(const Measure& a, double ca, const Measure& b, double cb) {
  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  for (const auto& [m, c] : {std::pair{&a, ca}, std::pair{&b, cb}}) {
    for (auto at : m->atoms_) {
      at.weight *= c;
      atoms.push_back(at);
    }
    for (auto s : m->segments_) {
      for (auto& d : s.density) d *= c;
      segments.push_back(std::move(s));
    }
  }
  return from_parts(std::move(atoms), std::move(segments), std::nullopt);
}

void Measure::canonicalize() {
  for (auto& a : atoms_)
    if (a.location == 0.0) a.location = 0.0;
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& x, const Atom& y) { return x.location < y.location; });
  std::vector<Atom> merged;
  for (const auto& a : atoms_) {
    if (!merged.empty() && merged.back().location == a.location)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  atoms_ = std::move(merged);

  auto key = [](const Segment& s) {
    return std::make_tuple(s.lo, s.hi, static_cast<int>(s.rule), s.nodes.size());
  };
  std::stable_sort(segments_.begin(), segments_.end(),
                   [&](const Segment& x, const Segment& y) { return key(x) < key(y); });
  std::vector<Segment> segs;
  for (auto& s : segments_) {
    if (!segs.empty() && key(segs.back()) == key(s)) {
      for (size_t i = 0; i < s.density.size(); ++i) segs.back().density[i] += s.density[i];
    } else {
      segs.push_back(std::move(s));
    }
  }
  segments_ = std::move(segs);

  mass_ = 0.0;
  total_variation_ = 0.0;
  positive_ = true;
  bool any = false;
  lo_ = 0.0;
  hi_ = 0.0;
  auto extend = [&](double lo, double hi) {
    lo_ = any ? std::min(lo_, lo) : lo;
    hi_ = any ? std::max(hi_, hi) : hi;
    any = true;
  };
  for (const auto& a : atoms_) {
    mass_ += a.weight;
    total_variation_ += std::abs(a.weight);
    if (a.weight < 0.0) positive_ = false;
    if (a.weight != 0.0) extend(a.location, a.location);
  }
  for (const auto& s : segments_) {
    for (size_t i = 0; i < s.nodes.size(); ++i) {
      mass_ += s.weights[i] * s.density[i];
      total_variation_ += s.weights[i] * std::abs(s.density[i]);
      if (s.density[i] < 0.0) positive_ = false;
    }
    extend(s.lo, s.hi);
  }
  radius_ = std::max(std::abs(lo_), std::abs(hi_));
}

bool Measure::is_symmetric() const {
  if (law_) return law_is_symmetric(*law_);
  const Measure s = symmetrize(*this);
  return s.atoms_ == atoms_ && s.segments_ == segments_;
}

namespace {

double law_radius(const NamedLaw& law) {
  if (law.kind == LawKind::Uniform) return std::max(std::abs(law.p1), std::abs(law.p2));
  return std::abs(law.p1);
}

bool use_series(const NamedLaw& law, cplx w) {
  if (law.kind == LawKind::SymmetricBernoulli) return false;
  return std::abs(w) > 4.0 * law_radius(law);
}

// Enough terms for (radius / |w|)^k < 1e-18.
int series_terms(const NamedLaw& law, cplx w) {
  const double ratio = law_radius(law) / std::abs(w);
  if (ratio == 0.0) return 1;
  return std::min(64, static_cast<int>(std::ceil(std::log(1e-18) / std::log(ratio))) + 2);
}

// Laurent series -sum m_k w^-(k+1) and its derivatives, for |w| > 4 * radius.
cplx moment_series(const NamedLaw& law, cplx w, int order) {
  const cplx inv = 1.0 / w;
  cplx power = std::pow(inv, order + 1);
  cplx acc = 0.0;
  const int terms = series_terms(law, w);
  for (int k = 0; k < terms; ++k) {
    double c = named_moment(law, k);
    for (int j = 1; j <= order; ++j) c *= (k + j);
    acc += c * power;
    power *= inv;
  }
  return (order % 2 == 0) ? -acc : acc;
}

}  // namespace

cplx first_moment_transform(const Measure& mu, cplx w) {
  if (mu.law()) {
    const NamedLaw& law = *mu.law();
    if (use_series(law, w)) {
      // 1 + w m(w) = -sum_{k>=1} m_k w^-k
      const cplx inv = 1.0 / w;
      cplx power = inv, acc = 0.0;
      const int terms = series_terms(law, w);
      for (int k = 1; k < terms; ++k) {
        acc += named_moment(law, k) * power;
        power *= inv;
      }
      return -acc;
    }
    if (law.kind != LawKind::SymmetricBernoulli) return 1.0 + w * named_transform(law, w, 0);
  }
  cplx acc = 0.0;
  auto term = [&](double t, double mass) {
    const cplx d = t - w;
    if (d == cplx(0.0)) fail(ErrorCode::Pole, "transform evaluated at an atom");
    acc += mass * t / d;
  };
  for (const auto& a : mu.atoms()) term(a.location, a.weight);
  for (const auto& s : mu.segments())
    for (size_t i = 0; i < s.nodes.size(); ++i) term(s.nodes[i], s.weights[i] * s.density[i]);
  return acc;
}

cplx named_transform(const NamedLaw& law, cplx w, int order) {
  require(order >= 0 && order <= 2, ErrorCode::Unsupported, "transform order must be 0, 1 or 2");
  if (use_series(law, w)) return moment_series(law, w, order);
  if (!law.symmetrized) return base_transform(law, w, order);
  const double sign = (order % 2 == 0) ? 1.0 : -1.0;
  return 0.5 * (base_transform(law, w, order) - sign * base_transform(law, -w, order));
}

cplx discrete_transform(const Measure& mu, cplx w, int order) {
  require(order >= 0 && order <= 2, ErrorCode::Unsupported, "transform order must be 0, 1 or 2");
  const double f = factorial(order);
  cplx acc = 0.0;
  auto term = [&](double t, double mass) {
    const cplx d = t - w;
    if (d == cplx(0.0)) fail(ErrorCode::Pole, "transform evaluated at an atom");
    cplx r = 1.0 / d;
    cplx p = r;
    for (int k = 0; k < order; ++k) p *= r;
    acc += mass * p;
  };
  for (const auto& a : mu.atoms()) term(a.location, a.weight);
  for (const auto& s : mu.segments())
    for (size_t i = 0; i < s.nodes.size(); ++i) term(s.nodes[i], s.weights[i] * s.density[i]);
  return f * acc;
}

cplx transform(const Measure& mu, cplx w, int order) {
  if (mu.law()) return named_transform(*mu.law(), w, order);
  return discrete_transform(mu, w, order);
}

cplx stieltjes(const Measure& mu, UpperHalfPoint z, int order) {
  require(z.eta > 0.0, ErrorCode::Domain, "stieltjes transform needs Im z > 0");
  return transform(mu, z.z(), order);
}

Measure symmetrize(const Measure& mu) {
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) {
    atoms.push_back({a.location, 0.5 * a.weight});
    atoms.push_back({-a.location, 0.5 * a.weight});
  }
  std::vector<Segment> segments;
  for (const auto& s : mu.segments()) {
    Segment half = s;
    for (auto& d : half.density) d *= 0.5;
    segments.push_back(mirror(half));
    segments.push_back(std::move(half));
  }
  std::optional<NamedLaw> law = mu.law();
  if (law && !law_is_symmetric(*law)) law->symmetrized = true;
  return Measure::from_parts(std::move(atoms), std::move(segments), law);
}

double moment(const Measure& mu, int k, bool allow_negative) {
  if (k < 0) {
    require(allow_negative, ErrorCode::InvalidArgument,
            "negative moment requested without allow_negative");
    for (const auto& a : mu.atoms())
      require(!(a.location == 0.0 && a.weight != 0.0), ErrorCode::SingularMoment,
              "negative moment of a measure with an atom at 0");
    for (const auto& s : mu.segments())
      require(!(s.lo <= 0.0 && s.hi >= 0.0), ErrorCode::SingularMoment,
              "negative moment of a measure whose support touches 0");
  }
  double acc = 0.0;
  for (const auto& a : mu.atoms()) acc += a.weight * std::pow(a.location, k);
  for (const auto& s : mu.segments())
    for (size_t i = 0; i < s.nodes.size(); ++i)
      acc += s.weights[i] * s.density[i] * std::pow(s.nodes[i], k);
  return acc;
}

double named_moment(const NamedLaw& law, int k) {
  require(k >= 0, ErrorCode::InvalidArgument, "closed-form moments need k >= 0");
  if (k == 0) return 1.0;
  const bool odd = (k % 2 == 1);
  switch (law.kind) {
    case LawKind::Semicircle: {
      if (odd) return 0.0;
      const int j = k / 2;
      double catalan = 1.0;
      for (int i = 0; i < j; ++i) catalan = catalan * 2.0 * (2.0 * i + 1.0) / (i + 2.0);
      return catalan * std::pow(law.p1 / 2.0, k);
    }
    case LawKind::Arcsine: {
      if (odd) return 0.0;
      const int j = k / 2;
      double central = 1.0;
      for (int i = 0; i < j; ++i) central = central * (2.0 * i + 1.0) / (2.0 * i + 2.0);
      return central * std::pow(law.p1, k);
    }
    case LawKind::Uniform: {
      if (odd && law.symmetrized) return 0.0;
      const double lo = law.p1, hi = law.p2;
      return (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
    }
    case LawKind::SymmetricBernoulli:
      return odd ? 0.0 : std::pow(law.p1, k);
  }
  return 0.0;
}

Measure empirical_measure(std::span<const double> values) {
  require(!values.empty(), ErrorCode::InvalidArgument, "empirical measure of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double w = 1.0 / static_cast<double>(v.size());
  std::vector<Atom> atoms;
  for (size_t i = 0; i < v.size();) {
    size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    atoms.push_back({v[i], static_cast<double>(j - i) * w});
    i = j;
  }
  return Measure::from_atoms(std::move(atoms));
}

std::vector<double> default_eta_schedule() {
  std::vector<double> s;
  for (int k = 0; k < 6; ++k) s.push_back(0.1 * std::ldexp(1.0, -k));
  return s;
}

DensityEstimate density_at(const TransformFn& m, double E, std::span<const double> eta) {
  require(eta.size() >= 2, ErrorCode::InvalidArgument, "eta schedule needs at least two levels");
  for (size_t k = 0; k < eta.size(); ++k) {
    require(eta[k] > 0.0, ErrorCode::Domain, "eta schedule must be positive");
    require(k == 0 || eta[k] < eta[k - 1], ErrorCode::InvalidArgument,
            "eta schedule must be strictly decreasing");
  }
  const size_t n = eta.size();
  // p[i] holds the extrapolated value to eta = 0 from levels i..i+j.
  std::vector<double> p(n);
  for (size_t k = 0; k < n; ++k) p[k] = m(cplx(E, eta[k])).imag() / kPi;
  double previous = p[n - 1];
  for (size_t j = 1; j < n; ++j) {
    for (size_t i = 0; i + j < n; ++i)
      p[i] = (eta[i] * p[i + 1] - eta[i + j] * p[i]) / (eta[i] - eta[i + j]);
    if (j == n - 1) break;
    previous = p[1];
  }
  return {p[0], std::abs(p[0] - previous)};
}

DensityEstimate density_at(const Measure& mu, double E) {
  const auto schedule = default_eta_schedule();
  return density_at([&](cplx w) { return transform(mu, w); }, E, schedule);
}

nlohmann::json to_json(const Measure& mu) {
  nlohmann::json j;
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : mu.atoms()) j["atoms"].push_back({a.location, a.weight});
  j["segments"] = nlohmann::json::array();
  for (const auto& s : mu.segments()) {
    j["segments"].push_back({{"lo", s.lo},
                             {"hi", s.hi},
                             {"rule", rule_name(s.rule)},
                             {"n_nodes", s.nodes.size()},
                             {"densities", s.density}});
  }
  if (mu.law()) {
    const auto& law = *mu.law();
    nlohmann::json params = {law.p1};
    if (law.kind == LawKind::Uniform) params.push_back(law.p2);
    j["named_law"] = {{"kind", kind_name(law.kind)},
                      {"params", params},
                      {"symmetrized", law.symmetrized}};
  } else {
    j["named_law"] = nullptr;
  }
  j["mass"] = mu.total_mass();
  j["positive"] = mu.positive();
  return j;
}

Measure measure_from_json(const nlohmann::json& j) {
  try {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    std::vector<Segment> segments;
    for (const auto& s : j.at("segments")) {
      const int n = s.at("n_nodes").get<int>();
      Segment seg = Segment::make(s.at("lo").get<double>(), s.at("hi").get<double>(),
                                  rule_from_name(s.at("rule").get<std::string>()), n);
      seg.density = s.at("densities").get<std::vector<double>>();
      require(seg.density.size() == static_cast<size_t>(n), ErrorCode::InvalidArgument,
              "segment density count does not match n_nodes");
      segments.push_back(std::move(seg));
    }
    std::optional<NamedLaw> law;
    if (j.contains("named_law") && !j.at("named_law").is_null()) {
      const auto& l = j.at("named_law");
      const auto kind = l.at("kind").get<std::string>();
      const auto params = l.at("params").get<std::vector<double>>();
      std::string text = kind + "(" + nlohmann::json(params[0]).dump();
      if (params.size() > 1) text += "," + nlohmann::json(params[1]).dump();
      law = NamedLaw::parse(text + ")");
      law->symmetrized = l.value("symmetrized", false);
    }
    return Measure::from_parts(std::move(atoms), std::move(segments), law);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("malformed measure record: ") + e.what());
  }
}

std::string serialize(const Measure& mu) { return to_json(mu).dump(); }

Measure deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("measure record is not JSON: ") + e.what());
  }
  return measure_from_json(j);
}

Measure parse_law(const std::string& text, int nodes) {
  auto [name, args] = split_call(text);
  if (name == "point") {
    require(args.size() == 1, ErrorCode::InvalidArgument, "point expects one argument");
    return Measure::point(parse_double(args[0]));
  }
  if (name == "atoms") {
    std::vector<Atom> atoms;
    for (const auto& a : args) {
      const auto colon = a.find(':');
      require(colon != std::string::npos, ErrorCode::InvalidArgument,
              "atoms entries look like location:weight");
      atoms.push_back({parse_double(a.substr(0, colon)), parse_double(a.substr(colon + 1))});
    }
    require(!atoms.empty(), ErrorCode::InvalidArgument, "atoms() needs at least one entry");
    return Measure::from_atoms(std::move(atoms));
  }
  return Measure::named(NamedLaw::parse(text), nodes);
}

}  // namespace ringlab
