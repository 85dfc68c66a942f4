#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lowrank/linalg.hpp"
#include "lowrank/observations.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

/// Ground-truth rank-r matrix with its SVD factors and structural diagnostics.
struct LowRankMatrix {
  Matrix matrix;
  int r = 0;
  SvdFactors factors;
  /// max(sqrt(m/r) ||U||_{2->inf}, sqrt(n/r) ||V||_{2->inf})
  double mu = 1.0;
  /// sigma_1 / sigma_r
  double kappa = 1.0;
  /// Seed of the generator that produced the instance (0 when built from a matrix).
  std::uint64_t seed = 0;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
  double max_abs() const { return matrix.cwiseAbs().maxCoeff(); }
};

/// Row-stochastic transition matrix with its stationary law and mixing time.
struct MarkovChain {
  Matrix P;
  Vector nu;
  /// Long-run transition frequencies diag(nu) P.
  Matrix M;
  int r = 0;
  /// tau(1/4); empty when mixing was not computed or the chain does not mix.
  std::optional<int> tau_star;

  int states() const { return static_cast<int>(P.rows()); }
  double nu_min() const { return nu.minCoeff(); }
};

enum class NoiseKind { None, UniformBounded, ScaledRademacher };

/// Zero-mean noise bounded by c1 * ||M||_inf.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::ScaledRademacher;
  double c1 = 0.5;

  double draw(double scale, Rng& rng) const;
};

enum class MatrixStyle { Homogeneous, Spiked };

/// Diagnostics of an arbitrary matrix taken as rank r. Throws ParameterError if
/// the matrix is numerically of rank below r or above r.
LowRankMatrix low_rank_from_matrix(const Matrix& m, int r);

/// Homogeneous: factors with i.i.d. Uniform[-1, 1] entries, rescaled so
/// ||M||_inf = 1, rejecting draws with mu > 3 or kappa > 5 (GenerationError
/// after 1000 draws). Spiked: random orthonormal factors with the singular
/// values given in `spectrum` (length r).
LowRankMatrix make_low_rank_matrix(int m, int n, int r, MatrixStyle style, Rng& rng,
                                   std::span<const double> spectrum = {});

/// ||M||_inf <= sigma_1 mu^2 r / sqrt(mn). Always true; exposed as a self-test.
bool spikiness_check(const LowRankMatrix& l);

struct ChainOptions {
  bool require_irreducible = true;
  bool compute_mixing = true;
  /// Rank to record; 0 means use the numerical rank of P.
  int rank = 0;
};

/// Stationary distribution from the linear system nu^T (I - P) = 0, sum nu = 1.
/// Throws ReducibleChainError when the system is singular.
Vector stationary_distribution(const Matrix& p);

/// Wraps an explicit transition matrix.
MarkovChain chain_from_transition(const Matrix& p, const ChainOptions& options = {});

/// DirichletFlat: rows of H are flat Dirichlet. Homogeneous: each row of H is
/// averaged with the uniform row, so every entry of P is at least 1/(2n) and
/// M_max / M_min stays bounded.
enum class ChainStyle { DirichletFlat, Homogeneous };

/// P = W H with W (n x r) having flat-Dirichlet rows and H (r x n) per
/// `style`. Rejects draws whose numerical rank is below r or that are reducible.
MarkovChain make_low_rank_chain(int n, int r, Rng& rng,
                                ChainStyle style = ChainStyle::DirichletFlat);

/// Smallest t >= 1 with max_i 0.5 ||P^t_{i,:} - nu||_1 <= eps, by powering.
/// Throws NonMixingError when t would exceed `cap`.
int mixing_time(const Matrix& p, double eps, int cap = 1'000'000);

/// Count of singular values above rel_tol * sigma_1.
int numerical_rank(const Matrix& a, double rel_tol);

/// Model I: T entries drawn uniformly from the grid, each observed as M_ij + xi.
ObservationBatch sample_model1(const LowRankMatrix& l, std::size_t T, const NoiseSpec& noise,
                               Rng& rng);

/// Checks that nu0 is a distribution over n states (strictly positive unless
/// `require_positive` is false).
void validate_distribution(std::span<const double> nu0, int n, bool require_positive = true);

/// Model II(a): T/2 independent pairs x ~ nu0, x' ~ P_{x,:}. T must be even.
ObservationBatch sample_generative(const MarkovChain& chain, std::span<const double> nu0,
                                   std::size_t T, Rng& rng);

/// Model II(b): one trajectory of length T with x_1 ~ nu0. nu0 may have zeros.
ObservationBatch sample_trajectory(const MarkovChain& chain, std::span<const double> nu0,
                                   std::size_t T, Rng& rng);

}  // namespace lowrank
