#pragma once

#include <iosfwd>
#include <vector>

#include "ringlab/freeconv.hpp"
#include "ringlab/measures.hpp"

namespace ringlab {

struct AnnulusBounds {
  double a = 0.0;
  double b = 0.0;
};

/// a = (int x^-2 dnu)^(-1/2), b = (int x^2 dnu)^(1/2); a = 0 when the
/// negative moment diverges.
AnnulusBounds annulus_bounds(const Measure& nu);

/// Transform of nu_inf,r = nu^s [+] (delta_r + delta_-r)/2.
cplx nu_infinity_m(const Measure& nu, double r, UpperHalfPoint w);

struct LogPotential {
  double value = 0.0;
  double error_bound = 0.0;
};

/// L(r) = int log|x| dnu_inf,r. The part of the integral on [t_cut, 3K] is
/// computed as (2/pi) Im of int log(w) m(w) dw along a rectangle in the upper
/// half-plane, and the part on [0, t_cut] is estimated from the density at
/// t_cut. error_bound = pi M t(1 - log t) + quadrature and density estimates,
/// with M the density bound of nu^s estimated on a probe grid.
LogPotential log_potential(const Measure& nu, double r, double t_cut = 1e-3);

/// The same integral through int_0^inf [1/(1+y) - Im m(iy)] dy, valid for
/// symmetric nu_inf,r. Used for the Laplacian.
double log_potential_axis(const Measure& nu, double r);

/// Density bound of nu^s estimated as sup Im m / pi on a probe grid.
double density_bound_estimate(const Measure& nu);

/// (L'' + L'/r) / (2 pi) by central differences with one Richardson step
/// (h, h/2). Requires a + 2h <= r <= b - 2h.
double ring_density(const Measure& nu, double r, double h = 1e-2);
/// Same formula without the support check, for diagnostics.
double ring_density_unchecked(const Measure& nu, double r, double h = 1e-2);

struct RingLawOptions {
  int grid_points = 201;
  double edge_offset = 0.02;
  double h = 1e-2;
  int threads = 1;
};

struct RingLaw {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> r_grid;
  std::vector<double> log_potential;
  std::vector<double> density;
  /// Densities at a and b by linear extrapolation from the grid, clamped at 0.
  double edge_density_a = 0.0;
  double edge_density_b = 0.0;
  double normalization_defect = 0.0;

  /// rho(|w|) with linear interpolation on the grid and the edge strips; 0
  /// outside [a, b].
  double density_at_radius(double r) const;
  /// int rho 2 pi r dr over [a, b] (trapezoid on the grid plus edge strips).
  double total_mass() const;
};

RingLaw ring_law(const Measure& nu, const RingLawOptions& options = {});

/// mu(B(z0, radius)) for the radial law: exact angular measure of the disc
/// on each circle |w| = r times a Gauss-Legendre radial quadrature.
double ring_ball_mass(const RingLaw& ring, cplx z0, double radius);

/// Angle (in [0, 2 pi]) of the circle |w| = r that lies inside B(z0, R).
double circle_arc_in_disc(double r, cplx z0, double R);

void write_ring_csv(const RingLaw& ring, std::ostream& out);

}  // namespace ringlab
