#pragma once

#include <functional>
#include <vector>

namespace ringlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1], nodes ascending and exactly mirror-symmetric.
/// Rules are cached; the reference stays valid for the program lifetime.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [lo, hi].
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Composite Gauss-Legendre: `panels` equal panels of `n` nodes each.
QuadratureRule composite_gauss_legendre(int n, double lo, double hi, int panels);

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

/// Runs fn(i) for i in [0, count) on `threads` workers. Work is split into
/// contiguous blocks, so callers that write results by index are deterministic.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace ringlab
