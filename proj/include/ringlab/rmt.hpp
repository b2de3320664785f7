#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ringlab/linalg.hpp"
#include "ringlab/measures.hpp"

namespace ringlab {

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of the index-th independent draw under a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// T singular values for A = U diag(T) V and optional B singular values for
/// sum models A + U' diag(B) V'*. With a_is_diagonal, A = diag(T).
struct ModelSpec {
  int N = 2;
  std::vector<double> T;
  std::optional<std::vector<double>> B;
  std::uint64_t seed = 0;
  bool a_is_diagonal = false;

  /// max(max T, max B)
  double K() const;
  void validate(double K_max = 10.0) const;
};

/// Quantiles of nu at the midpoints (i - 1/2) / N, i = 1..N.
std::vector<double> quantile_values(const Measure& nu, int N);

double cdf(const Measure& nu, double x);

ModelSpec model_from_laws(const Measure& T_law, int N, std::uint64_t seed,
                          const Measure* B_law = nullptr);

CMatrix haar_unitary(int N, std::mt19937_64& rng);
CMatrix complex_ginibre(int N, std::mt19937_64& rng);
/// Eigenvalues (ascending) of a GOE matrix scaled so the limit law is semicircle(2):
/// off-diagonal variance 1/N, diagonal variance 2/N.
Eigen::VectorXd goe_eigenvalues(int N, std::mt19937_64& rng);

enum class SvTarget { Model, Shifted };

struct SampleRequest {
  /// Model: singular values of A (or A + B~ for sum models). Shifted: of z0 - A.
  SvTarget target = SvTarget::Model;
  cplx z0{0.0, 0.0};
  bool eigenvalues = true;
  bool vectors = false;
};

struct SpectralSample {
  std::vector<cplx> eigenvalues;      ///< of A or A + B~
  std::vector<double> singular_values;  ///< descending
  std::optional<CMatrix> left_vectors;
  std::optional<CMatrix> right_vectors;
  std::uint64_t seed_used = 0;
};

/// The model matrix (A or A + B~) of one draw.
CMatrix model_matrix(const ModelSpec& spec, std::mt19937_64& rng);

SpectralSample sample_model(const ModelSpec& spec, std::mt19937_64& rng,
                            const SampleRequest& request = {});
/// Draw number `index` under spec.seed.
SpectralSample sample_model(const ModelSpec& spec, const SampleRequest& request = {},
                            std::uint64_t index = 0);

/// CSV with columns index, re_lambda, im_lambda, s; missing entries are empty.
void write_sample_csv(const SpectralSample& sample, std::ostream& out);

/// {+-s_i}, ascending.
std::vector<double> hermitize_spectrum(std::span<const double> singular_values);

/// (1/2N) sum_i -2z / (z^2 - s_i^2): the transform of the Hermitization.
cplx resolvent_trace(std::span<const double> singular_values, UpperHalfPoint z);

/// Normalized traces of the two diagonal N x N blocks.
std::pair<cplx, cplx> tau_block(const CMatrix& M);

/// (0, X; X*, 0)
CMatrix hermitization(const CMatrix& X);

/// (H - z)^-1 for the Hermitization H of X, from the SVD of X.
CMatrix hermitized_resolvent(const CMatrix& X, cplx z);

struct EstimateOptions {
  int threads = 1;
  /// Also compute operator norms of the unprojected averages (one dense
  /// 2N x 2N accumulation per draw).
  bool raw_norms = false;
  /// C in the lower bound Im S >= -C / (samples eta^7).
  double im_s_constant = 1.0;
};

struct SubordinationEstimate {
  cplx S_A_emp;
  cplx S_B_emp;
  cplx m_H_emp;
  cplx f_A_emp;
  cplx f_B_emp;
  /// ||P(avg G_H) - G_A(z + S_B)||, P the projection onto matrices invariant
  /// under the symmetries of A (diagonal phases, permutations of equal T).
  double resolvent_residual_A = 0.0;
  /// The same for B, each draw taken in the frame where B~ = diag(B).
  double resolvent_residual_B = 0.0;
  std::optional<double> raw_residual_A;
  std::optional<double> raw_residual_B;
  /// (1/2N) Tr of the residual matrices; r_B also with 1/N.
  cplx trace_residual_A;
  cplx trace_residual_B;
  cplx trace_residual_B_over_N;
  double consistency_defect = 0.0;
  bool im_s_ok = true;
  int samples = 0;
  double se_S_A = 0.0;
  double se_S_B = 0.0;
  double se_m_H = 0.0;
  double se_f_A = 0.0;
  double se_f_B = 0.0;
};

/// Monte Carlo subordination estimate over draws derive_seed(spec.seed, i).
/// A is taken diagonal, A = diag(T).
SubordinationEstimate estimate_subordination(const ModelSpec& spec, UpperHalfPoint z, int samples,
                                             const EstimateOptions& options = {});

struct SchwingerDysonResult {
  /// Operator norm of the projected average of tau(G) B G - tau(G B) G.
  double residual = 0.0;
  double standard_error = 0.0;  ///< jackknife
  std::optional<double> raw_residual;
};

SchwingerDysonResult schwinger_dyson_residual(const ModelSpec& spec, UpperHalfPoint z,
                                              int samples, const EstimateOptions& options = {});

/// Largest off-diagonal entry within the N x N blocks of avg G_H (A diagonal).
double block_structure_defect(const ModelSpec& spec, UpperHalfPoint z, int samples,
                              int threads = 1);

struct DelocalizationStats {
  double max_u_component_sq = -1.0;
  double max_v_component_sq = -1.0;
  int count_in_window = 0;
};

/// Maxima of |u_a(i)|^2, |v_a(i)|^2 over singular values in [E - eps, E + eps].
DelocalizationStats delocalization_stats(const SpectralSample& sample, double E, double eps);

struct SminProbe {
  std::vector<double> probabilities;
  std::vector<double> quantiles;
  std::vector<double> values;  ///< per seed
  int tiny_count = 0;          ///< s_min < 1e-12
};

/// s_min(z0 - A) over draws 0..seeds-1.
SminProbe smallest_sv_probe(const ModelSpec& spec, cplx z0, int seeds, int threads = 1);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double p);

}  // namespace ringlab
