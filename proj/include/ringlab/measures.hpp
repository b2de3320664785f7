#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringlab/error.hpp"

namespace ringlab {

enum class LawKind { Semicircle, Arcsine, Uniform, SymmetricBernoulli };

/// Closed-form law. Parameters: semicircle(radius), arcsine(half_width),
/// uniform(lo, hi), bernoulli(c) = (delta_c + delta_-c)/2.
struct NamedLaw {
  LawKind kind = LawKind::Semicircle;
  double p1 = 2.0;
  double p2 = 0.0;
  bool symmetrized = false;

  std::string to_string() const;
  /// Parses "semicircle(2)", "arcsine(2)", "uniform(0.5,4)", "bernoulli(1)".
  static NamedLaw parse(const std::string& text);
  bool operator==(const NamedLaw&) const = default;
};

enum class SegmentRule { GaussLegendre, Angle };

struct Atom {
  double location = 0.0;
  double weight = 0.0;
  bool operator==(const Atom&) const = default;
};

/// Absolutely continuous piece on [lo, hi] stored as a quadrature rule with
/// densities at the nodes: the mass near nodes[i] is weights[i] * density[i].
/// The Angle rule places nodes at c + h sin(pi g / 2) for Gauss-Legendre g,
/// which resolves inverse square-root edges.
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  SegmentRule rule = SegmentRule::GaussLegendre;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> density;

  static Segment make(double lo, double hi, SegmentRule rule, int n);
  bool operator==(const Segment&) const = default;
};

class Measure {
 public:
  Measure() = default;

  static Measure point(double c);
  /// Finite atomic measure. Negative weights give a signed measure.
  static Measure from_atoms(std::vector<Atom> atoms);
  static Measure named(const NamedLaw& law, int nodes = 512);
  static Measure semicircle(double radius, int nodes = 512);
  static Measure arcsine(double half_width, int nodes = 512);
  static Measure uniform(double lo, double hi, int nodes = 512);
  static Measure symmetric_bernoulli(double c);
  /// Sum ca * a + cb * b. The result carries no named law.
  static Measure combine(const Measure& a, double ca, const Measure& b, double cb);
  static Measure from_parts(std::vector<Atom> atoms, std::vector<Segment> segments,
                            std::optional<NamedLaw> law);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::optional<NamedLaw>& law() const { return law_; }

  double total_mass() const { return mass_; }
  double total_variation() const { return total_variation_; }
  bool positive() const { return positive_; }
  /// max |x| over the support.
  double support_radius() const { return radius_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  bool is_symmetric() const;

  bool operator==(const Measure& other) const {
    return atoms_ == other.atoms_ && segments_ == other.segments_ && law_ == other.law_;
  }

 private:
  void canonicalize();

  std::vector<Atom> atoms_;
  std::vector<Segment> segments_;
  std::optional<NamedLaw> law_;
  double mass_ = 0.0;
  double total_variation_ = 0.0;
  double radius_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  bool positive_ = true;
};

using TransformFn = std::function<cplx(cplx)>;

/// order-th derivative of m(w) = int dmu(t) / (t - w) at a point of C+.
cplx stieltjes(const Measure& mu, UpperHalfPoint z, int order = 0);

/// Same transform continued to any w off the support. Uses the closed form
/// for named laws and the stored discretization otherwise.
cplx transform(const Measure& mu, cplx w, int order = 0);

/// Transform of the stored discretization, ignoring any closed form.
cplx discrete_transform(const Measure& mu, cplx w, int order = 0);

/// int t / (t - w) dmu(t) = 1 + w m(w), computed without cancellation at
/// large |w|.
cplx first_moment_transform(const Measure& mu, cplx w);

/// Closed-form transform of a named law (honours the symmetrized flag).
cplx named_transform(const NamedLaw& law, cplx w, int order = 0);

Measure symmetrize(const Measure& mu);

/// int x^k dmu. Negative k requires allow_negative and a support away from 0.
double moment(const Measure& mu, int k, bool allow_negative = false);

/// Closed-form moment of a named law, k >= 0.
double named_moment(const NamedLaw& law, int k);

/// Uniform weights 1/N, equal values merged into one atom.
Measure empirical_measure(std::span<const double> values);

struct DensityEstimate {
  double density = 0.0;
  double error_estimate = 0.0;
};

/// Default schedule eta_k = 0.1 * 2^-k, k = 0..5.
std::vector<double> default_eta_schedule();

/// Im m(E + i eta) / pi extrapolated to eta -> 0 by a polynomial (Neville)
/// table over a strictly decreasing schedule. The error estimate is the last
/// increment of the table.
DensityEstimate density_at(const TransformFn& m, double E,
                           std::span<const double> eta_schedule);
DensityEstimate density_at(const Measure& mu, double E);

nlohmann::json to_json(const Measure& mu);
Measure measure_from_json(const nlohmann::json& j);
std::string serialize(const Measure& mu);
Measure deserialize(const std::string& text);

/// Parses a law description: a named law ("uniform(0.5,4)"), "point(c)", or
/// "atoms(t1:w1,t2:w2,...)".
Measure parse_law(const std::string& text, int nodes = 512);

}  // namespace ringlab
