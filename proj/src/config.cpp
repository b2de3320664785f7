#include "ringlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace ringlab {

namespace {

constexpr int kMaxN = 2000;

struct KindInfo {
  ExperimentKind kind;
  const char* name;
  std::set<std::string> required;
  std::set<std::string> optional;
};

const std::set<std::string> kCommon{"kind", "name", "svg", "seed"};

const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> table{
      {ExperimentKind::FreeconvCheck, "freeconv-check", {"mu", "nu", "E", "eta"}, {"tolerance"}},
      {ExperimentKind::RingLaw, "ring-law", {"law"}, {"grid_points", "edge_offset", "h"}},
      {ExperimentKind::SimulateSpectrum, "simulate-spectrum", {"law", "N"}, {"seeds"}},
      {ExperimentKind::SubordinationResidual,
       "subordination-residual",
       {"law_a", "law_b", "N"},
       {"samples", "z", "repetitions"}},
      {ExperimentKind::SchwingerDyson, "schwinger-dyson", {"law_a", "law_b", "N"}, {"samples", "z"}},
      {ExperimentKind::LocalSrt,
       "local-srt",
       {"law", "N"},
       {"seeds", "z0", "eps", "alpha", "tolerance", "grid_points"}},
      {ExperimentKind::LocalSv, "local-sv", {"law_a", "law_b", "N", "E", "eta"}, {"seeds", "tolerance"}},
      {ExperimentKind::Delocalization, "delocalization", {"law_a", "N", "E"}, {"law_b", "seeds", "width"}},
      {ExperimentKind::Hadamard, "hadamard", {"N"}, {"a", "tv_norm"}},
  };
  return table;
}

const KindInfo& info(ExperimentKind k) {
  for (const KindInfo& i : kinds())
    if (i.kind == k) return i;
  fail(ErrorCode::Config, "unknown experiment kind");
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(const YAML::Node& n, const std::string& msg) const {
    error(n.Mark().line + 1, msg);
  }
  [[noreturn]] void error(int line, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ':' << line << ": " << msg;
    fail(ErrorCode::Config, os.str());
  }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) error(n, "'" + key + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      error(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
    }
  }

  double real(const YAML::Node& n, const std::string& key) const {
    const double v = scalar<double>(n, key);
    if (!std::isfinite(v)) error(n, "'" + key + "' must be finite");
    return v;
  }

  int integer(const YAML::Node& n, const std::string& key, int lo, int hi) const {
    const long long v = scalar<long long>(n, key);
    if (v < lo || v > hi)
      error(n, "'" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  std::uint64_t seed(const YAML::Node& n) const { return scalar<std::uint64_t>(n, "seed"); }

  cplx complex(const YAML::Node& n, const std::string& key) const {
    if (!n.IsSequence() || n.size() != 2) error(n, "'" + key + "' must be [re, im]");
    return {real(n[0], key), real(n[1], key)};
  }

  std::vector<double> reals(const YAML::Node& n, const std::string& key) const {
    std::vector<double> out;
    if (n.IsScalar()) {
      out.push_back(real(n, key));
    } else if (n.IsSequence()) {
      for (const auto& v : n) out.push_back(real(v, key));
    } else if (n.IsMap()) {
      for (const auto& kv : n) {
        const std::string k = kv.first.as<std::string>();
        if (k != "from" && k != "to" && k != "step") error(kv.first, "unknown key '" + k + "' in range");
      }
      if (!n["from"] || !n["to"] || !n["step"]) error(n, "'" + key + "' range needs from, to and step");
      const double a = real(n["from"], key), b = real(n["to"], key), s = real(n["step"], key);
      if (!(s > 0.0) || b < a) error(n, "'" + key + "' range needs step > 0 and to >= from");
      const int count = static_cast<int>(std::floor((b - a) / s + 1e-9)) + 1;
      if (count > 100000) error(n, "'" + key + "' range is too long");
      for (int i = 0; i < count; ++i) out.push_back(a + i * s);
    } else {
      error(n, "'" + key + "' must be a number, a list or a range");
    }
    if (out.empty()) error(n, "'" + key + "' is empty");
    return out;
  }

  std::vector<int> sizes(const YAML::Node& n) const {
    std::vector<int> out;
    if (n.IsScalar()) {
      out.push_back(integer(n, "N", 2, kMaxN));
    } else if (n.IsSequence() && n.size() > 0) {
      for (const auto& v : n) out.push_back(integer(v, "N", 2, kMaxN));
    } else {
      error(n, "'N' must be an integer or a non-empty list");
    }
    return out;
  }

  LawSpec law(const YAML::Node& n, const std::string& key) const {
    const std::string text = scalar<std::string>(n, key);
    try {
      return resolve_law(text);
    } catch (const Error& e) {
      error(n, "'" + key + "': " + e.what());
    }
  }

 private:
  std::string source_;
};

ExperimentConfig read_experiment(const Reader& r, const YAML::Node& n, size_t index,
                                 std::uint64_t global_seed) {
  if (!n.IsMap()) r.error(n, "each experiment must be a mapping");
  if (!n["kind"]) r.error(n, "experiment is missing 'kind'");
  const std::string kname = r.scalar<std::string>(n["kind"], "kind");
  const auto kind = parse_kind(kname);
  if (!kind) r.error(n["kind"], "unknown experiment kind '" + kname + "'");
  const KindInfo& ki = info(*kind);
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (!kCommon.count(key) && !ki.required.count(key) && !ki.optional.count(key))
      r.error(kv.first, "unknown key '" + key + "' for " + kname);
  }
  for (const std::string& key : ki.required)
    if (!n[key]) r.error(n, kname + " needs '" + key + "'");

  ExperimentConfig e;
  e.kind = *kind;
  e.line = n.Mark().line + 1;
  e.name = n["name"] ? r.scalar<std::string>(n["name"], "name") : kname + "-" + std::to_string(index);
  for (char c : e.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      r.error(n["name"], "'name' may only contain letters, digits, '-' and '_'");
  e.seed = n["seed"] ? r.seed(n["seed"]) : global_seed;
  if (n["svg"]) e.svg = r.scalar<bool>(n["svg"], "svg");
  for (const char* k : {"law", "mu", "law_a"})
    if (n[k]) e.law = r.law(n[k], k);
  for (const char* k : {"nu", "law_b"})
    if (n[k]) e.law_b = r.law(n[k], k);
  if (n["N"]) e.N = r.sizes(n["N"]);
  if (n["seeds"]) e.seeds = r.integer(n["seeds"], "seeds", 1, 100000);
  if (n["samples"]) e.samples = r.integer(n["samples"], "samples", 2, 1000000);
  if (n["repetitions"]) e.repetitions = r.integer(n["repetitions"], "repetitions", 1, 1000);
  if (n["E"]) e.E = r.reals(n["E"], "E");
  if (n["eta"]) {
    e.eta = r.reals(n["eta"], "eta");
    for (double v : e.eta)
      if (!(v > 0.0)) r.error(n["eta"], "'eta' values must be positive");
  }
  if (n["z"]) {
    e.z = r.complex(n["z"], "z");
    if (!(e.z.imag() > 0.0)) r.error(n["z"], "'z' must have a positive imaginary part");
  }
  if (n["z0"]) e.z0 = r.complex(n["z0"], "z0");
  if (n["eps"]) {
    e.eps = r.real(n["eps"], "eps");
    if (e.eps < 0.0) r.error(n["eps"], "'eps' must be non-negative (0 selects the default scale)");
  }
  if (n["alpha"]) e.alpha = r.real(n["alpha"], "alpha");
  if (n["width"]) {
    e.width = r.real(n["width"], "width");
    if (!(e.width > 0.0)) r.error(n["width"], "'width' must be positive");
  }
  if (n["tolerance"]) {
    e.tolerance = r.real(n["tolerance"], "tolerance");
    if (!(*e.tolerance >= 0.0)) r.error(n["tolerance"], "'tolerance' must be non-negative");
  }
  if (n["a"]) {
    e.a = r.real(n["a"], "a");
    if (!(e.a > 0.0)) r.error(n["a"], "'a' must be positive");
  }
  if (n["tv_norm"]) e.tv_norm = r.real(n["tv_norm"], "tv_norm");
  if (n["grid_points"]) e.grid_points = r.integer(n["grid_points"], "grid_points", 5, 100000);
  if (n["edge_offset"]) e.edge_offset = r.real(n["edge_offset"], "edge_offset");
  if (n["h"]) e.h = r.real(n["h"], "h");
  if (e.kind == ExperimentKind::Hadamard && e.N.size() != 1) r.error(n["N"], "hadamard takes a single N");
  return e;
}

}  // namespace

const char* kind_name(ExperimentKind kind) { return info(kind).name; }

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const KindInfo& i : kinds())
    if (name == i.name) return i.kind;
  return std::nullopt;
}

LawSpec resolve_law(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  LawSpec out{t, parse_law(t)};
  require(out.measure.positive() && std::abs(out.measure.total_mass() - 1.0) < 1e-12,
          ErrorCode::InvalidArgument, "law must be a probability measure");
  return out;
}

Config parse_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    r.error(e.mark.line + 1, e.msg);
  }
  Config c;
  c.source = source;
  c.hash = hex64(fnv1a(text));
  if (!root || root.IsNull()) r.error(1, "config is empty");
  if (!root.IsMap()) r.error(root, "config must be a mapping");
  static const std::set<std::string> top{"output", "seed", "threads", "experiments", "verify"};
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (!top.count(key)) r.error(kv.first, "unknown key '" + key + "'");
  }
  if (!root["seed"]) r.error(root, "'seed' is required");
  c.seed = r.seed(root["seed"]);
  if (root["output"]) c.output = r.scalar<std::string>(root["output"], "output");
  if (root["threads"]) c.threads = r.integer(root["threads"], "threads", 1, 256);
  if (root["experiments"]) {
    const YAML::Node ex = root["experiments"];
    if (ex.IsNull()) {
    } else if (!ex.IsSequence()) {
      r.error(ex, "'experiments' must be a list");
    } else {
      std::set<std::string> names;
      for (size_t i = 0; i < ex.size(); ++i) {
        ExperimentConfig e = read_experiment(r, ex[i], i, c.seed);
        if (!names.insert(e.name).second) r.error(ex[i], "duplicate experiment name '" + e.name + "'");
        c.experiments.push_back(std::move(e));
      }
    }
  }
  if (root["verify"]) {
    const YAML::Node v = root["verify"];
    if (!v.IsMap()) r.error(v, "'verify' must be a mapping");
    VerifyConfig vc;
    for (const auto& kv : v) {
      const std::string key = kv.first.as<std::string>();
      if (key == "bundle") {
        vc.bundle = r.scalar<std::string>(kv.second, "bundle");
      } else if (key == "tolerances") {
        if (!kv.second.IsMap()) r.error(kv.second, "'tolerances' must map criterion numbers to values");
        for (const auto& t : kv.second) {
          const int id = r.integer(t.first, "criterion", 1, 15);
          vc.tolerances[id] = r.real(t.second, "tolerance");
        }
      } else {
        r.error(kv.first, "unknown key '" + key + "' in verify");
      }
    }
    c.verify = vc;
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Config, path + ": cannot read config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void override_seed(Config& c, std::uint64_t seed) {
  c.seed = seed;
  for (ExperimentConfig& e : c.experiments) e.seed = seed;
  c.hash = hex64(fnv1a(c.hash + "|seed=" + std::to_string(seed)));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ringlab
