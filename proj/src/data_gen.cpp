#include "lowrank/data_gen.hpp"

#include <cmath>
#include <string>

#include "lowrank/config.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

constexpr int kMaxDraws = 1000;
constexpr double kHomogeneousMaxMu = 3.0;
constexpr double kHomogeneousMaxKappa = 5.0;

Matrix uniform_matrix(int rows, int cols, double lo, double hi, Rng& rng) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.uniform(lo, hi);
  return a;
}

Matrix random_orthonormal(int rows, int cols, Rng& rng) {
  const Matrix a = uniform_matrix(rows, cols, -1.0, 1.0, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

std::vector<CategoricalSampler> row_samplers(const Matrix& p) {
  std::vector<CategoricalSampler> out;
  out.reserve(static_cast<std::size_t>(p.rows()));
  std::vector<double> row(static_cast<std::size_t>(p.cols()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) row[static_cast<std::size_t>(j)] = p(i, j);
    out.emplace_back(row);
  }
  return out;
}

}  // namespace

double NoiseSpec::draw(double scale, Rng& rng) const {
  switch (kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::UniformBounded:
      return rng.uniform(-c1 * scale, c1 * scale);
    case NoiseKind::ScaledRademacher:
      return c1 * scale * rng.rademacher();
  }
  return 0.0;
}

int numerical_rank(const Matrix& a, double rel_tol) {
  const Vector s = thin_svd(a).sigma;
  if (s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rel_tol * s(0)) ++rank;
  return rank;
}

LowRankMatrix low_rank_from_matrix(const Matrix& m, int r) {
  require_finite(m, "low_rank_from_matrix");
  const auto k = std::min(m.rows(), m.cols());
  if (r < 1 || r > k) throw ParameterError("low_rank_from_matrix: rank out of range");
  SvdFactors full = thin_svd(m);
  const double top = full.sigma(0);
  if (!(full.sigma(r - 1) > kTolerances.rank_gap * top))
    throw ParameterError("low_rank_from_matrix: numerical rank below " + std::to_string(r));
  if (r < k && full.sigma(r) >= kTolerances.rank_gap * top)
    throw ParameterError("low_rank_from_matrix: numerical rank above " + std::to_string(r));

  LowRankMatrix out;
  out.matrix = m;
  out.r = r;
  out.factors = SvdFactors{full.U.leftCols(r), full.sigma.head(r), full.V.leftCols(r)};
  const double rows = static_cast<double>(m.rows());
  const double cols = static_cast<double>(m.cols());
  const double mu_u = std::sqrt(rows / r) * norm(out.factors.U, NormKind::TwoToInf);
  const double mu_v = std::sqrt(cols / r) * norm(out.factors.V, NormKind::TwoToInf);
  out.mu = std::max(mu_u, mu_v);
  out.kappa = out.factors.sigma(0) / out.factors.sigma(r - 1);
  return out;
}

LowRankMatrix make_low_rank_matrix(int m, int n, int r, MatrixStyle style, Rng& rng,
                                   std::span<const double> spectrum) {
  if (m < 1 || n < 1) throw ParameterError("make_low_rank_matrix: dimensions must be positive");
  if (r < 1 || r > std::min(m, n)) throw ParameterError("make_low_rank_matrix: rank out of range");

  if (style == MatrixStyle::Spiked) {
    if (spectrum.size() != static_cast<std::size_t>(r))
      throw ParameterError("make_low_rank_matrix: spiked style needs r singular values");
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      if (!(spectrum[k] > 0.0) || (k > 0 && spectrum[k] > spectrum[k - 1]))
        throw ParameterError("make_low_rank_matrix: spectrum must be positive and nonincreasing");
    }
    const Matrix u = random_orthonormal(m, r, rng);
    const Matrix v = random_orthonormal(n, r, rng);
    Vector s(r);
    for (int k = 0; k < r; ++k) s(k) = spectrum[static_cast<std::size_t>(k)];
    LowRankMatrix out = low_rank_from_matrix(u * s.asDiagonal() * v.transpose(), r);
    out.seed = rng.seed();
    return out;
  }

  double last_mu = 0.0;
  double last_kappa = 0.0;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const Matrix x = uniform_matrix(m, r, -1.0, 1.0, rng);
    const Matrix y = uniform_matrix(n, r, -1.0, 1.0, rng);
    Matrix mat = x * y.transpose();
    const double scale = mat.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) continue;
    mat /= scale;
    LowRankMatrix candidate;
    try {
      candidate = low_rank_from_matrix(mat, r);
    } catch (const ParameterError&) {
      continue;
    }
    last_mu = candidate.mu;
    last_kappa = candidate.kappa;
    if (candidate.mu <= kHomogeneousMaxMu && candidate.kappa <= kHomogeneousMaxKappa) {
      candidate.seed = rng.seed();
      return candidate;
    }
  }
  throw GenerationError("make_low_rank_matrix: no homogeneous draw in 1000 attempts (last mu=" +
                        std::to_string(last_mu) + ", kappa=" + std::to_string(last_kappa) + ")");
}

bool spikiness_check(const LowRankMatrix& l) {
  const double bound = l.factors.sigma(0) * l.mu * l.mu * l.r /
                       std::sqrt(static_cast<double>(l.rows()) * l.cols());
  return l.max_abs() <= bound * (1.0 + 1e-12);
}

Vector stationary_distribution(const Matrix& p) {
  const Eigen::Index n = p.rows();
  Matrix a = Matrix::Identity(n, n) - p.transpose();
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible())
    throw ReducibleChainError("stationary_distribution: stationary law is not unique");
  Vector nu = lu.solve(b);
  // Round-off can leave entries like -1e-17 on otherwise zero components.
  nu = nu.cwiseMax(0.0);
  nu /= nu.sum();
  return nu;
}

MarkovChain chain_from_transition(const Matrix& p, const ChainOptions& options) {
  require_finite(p, "chain_from_transition");
  if (p.rows() != p.cols()) throw ShapeError("chain_from_transition: P must be square");
  if (p.minCoeff() < 0.0) throw InputError("chain_from_transition: negative transition probability");
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (std::abs(p.row(i).sum() - 1.0) > kTolerances.stochastic_rows)
      throw InputError("chain_from_transition: row " + std::to_string(i) + " does not sum to 1");

  MarkovChain chain;
  chain.P = p;
  chain.nu = stationary_distribution(p);
  if (options.require_irreducible && chain.nu.minCoeff() < kTolerances.reducible_mass)
    throw ReducibleChainError("chain_from_transition: a state has zero stationary mass");
  chain.M = chain.nu.asDiagonal() * p;
  chain.r = options.rank > 0 ? options.rank : numerical_rank(p, kTolerances.rank_gap);
  if (options.compute_mixing) chain.tau_star = mixing_time(p, 0.25);
  return chain;
}

MarkovChain make_low_rank_chain(int n, int r, Rng& rng, ChainStyle style) {
  if (n < 1 || r < 1 || r > n) throw ParameterError("make_low_rank_chain: need 1 <= r <= n");
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Matrix w(n, r);
    Matrix h(r, n);
    for (int i = 0; i < n; ++i) {
      const auto row = rng.dirichlet_flat(static_cast<std::size_t>(r));
      for (int k = 0; k < r; ++k) w(i, k) = row[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < r; ++k) {
      const auto row = rng.dirichlet_flat(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) h(k, j) = row[static_cast<std::size_t>(j)];
      if (style == ChainStyle::Homogeneous) h.row(k) = 0.5 * h.row(k).array() + 0.5 / n;
    }
    Matrix p = w * h;
    // Remove the rounding drift of the row sums before validation.
    for (int i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();
    if (numerical_rank(p, kTolerances.rank_gap) != r) continue;
    try {
      return chain_from_transition(p, ChainOptions{.require_irreducible = true,
                                                   .compute_mixing = true,
                                                   .rank = r});
    } catch (const ReducibleChainError&) {
      continue;
    } catch (const NonMixingError&) {
      continue;
    }
  }
  throw GenerationError("make_low_rank_chain: no valid draw in 1000 attempts");
}

int mixing_time(const Matrix& p, double eps, int cap) {
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("mixing_time: eps must lie in (0, 1/2)");
  const Vector nu = stationary_distribution(p);
  const Eigen::RowVectorXd nu_row = nu.transpose();
  Matrix power = p;
  for (int t = 1; t <= cap; ++t) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < power.rows(); ++i)
      worst = std::max(worst, 0.5 * (power.row(i) - nu_row).cwiseAbs().sum());
    if (worst <= eps) return t;
    power = power * p;
  }
  throw NonMixingError("mixing_time: total variation above eps after " + std::to_string(cap) +
                       " steps");
}

ObservationBatch sample_model1(const LowRankMatrix& l, std::size_t T, const NoiseSpec& noise,
                               Rng& rng) {
  if (T < 1) throw ParameterError("sample_model1: T must be positive");
  ObservationBatch batch;
  batch.model = ObservationModel::Reward;
  batch.m = l.rows();
  batch.n = l.cols();
  batch.rewards.reserve(T);
  const double scale = l.max_abs();
  for (std::size_t t = 0; t < T; ++t) {
    const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(batch.m)));
    const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(batch.n)));
    batch.rewards.push_back({i, j, l.matrix(i, j) + noise.draw(scale, rng)});
  }
  return batch;
}

void validate_distribution(std::span<const double> nu0, int n, bool require_positive) {
  if (nu0.size() != static_cast<std::size_t>(n))
    throw InputError("distribution has " + std::to_string(nu0.size()) + " entries, expected " +
                     std::to_string(n));
  double total = 0.0;
  for (double x : nu0) {
    if (!std::isfinite(x) || x < 0.0 || (require_positive && x == 0.0))
      throw InputError(require_positive ? "distribution entries must be positive and finite"
                                        : "distribution entries must be nonnegative and finite");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("distribution does not sum to 1");
}

ObservationBatch sample_generative(const MarkovChain& chain, std::span<const double> nu0,
                                   std::size_t T, Rng& rng) {
  if (T < 2 || T % 2 != 0) throw ParameterError("sample_generative: T must be even and >= 2");
  const int n = chain.states();
  validate_distribution(nu0, n);
  const CategoricalSampler start(nu0);
  const auto rows = row_samplers(chain.P);
  ObservationBatch batch;
  batch.model = ObservationModel::TransitionPairs;
  batch.m = n;
  batch.n = n;
  batch.pairs.reserve(T / 2);
  for (std::size_t k = 0; k < T / 2; ++k) {
    const auto x = start.sample(rng);
    const auto y = rows[x].sample(rng);
    batch.pairs.emplace_back(static_cast<int>(x), static_cast<int>(y));
  }
  return batch;
}

ObservationBatch sample_trajectory(const MarkovChain& chain, std::span<const double> nu0,
                                   std::size_t T, Rng& rng) {
  if (T < 1) throw ParameterError("sample_trajectory: T must be positive");
  const int n = chain.states();
  validate_distribution(nu0, n, /*require_positive=*/false);
  const auto rows = row_samplers(chain.P);
  ObservationBatch batch;
  batch.model = ObservationModel::Trajectory;
  batch.m = n;
  batch.n = n;
  batch.states.reserve(T);
  std::size_t x = CategoricalSampler(nu0).sample(rng);
  batch.states.push_back(static_cast<int>(x));
  for (std::size_t t = 1; t < T; ++t) {
    x = rows[x].sample(rng);
    batch.states.push_back(static_cast<int>(x));
  }
  return batch;
}

}  // namespace lowrank
