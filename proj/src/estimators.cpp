#include "lowrank/estimators.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

double gap_ratio(const Matrix& m_tilde, int r) {
  const Vector s = thin_svd(m_tilde).sigma;
  if (r >= s.size() || s(r) == 0.0) return std::numeric_limits<double>::infinity();
  return s(r - 1) / s(r);
}

void check_rank(int r, int n, const char* who) {
  if (r < 1 || r > n)
    throw ParameterError(std::string(who) + ": rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(n) + "]");
}

FrequencyEstimate from_counts(Matrix m_tilde, int r, std::size_t T) {
  FrequencyEstimate est;
  est.M_hat = best_rank_r(m_tilde, r);
  est.P_hat = normalize_rows(est.M_hat);
  est.spectral_gap = gap_ratio(m_tilde, r);
  est.M_tilde = std::move(m_tilde);
  est.r = r;
  est.tau = 1;
  est.T = T;
  return est;
}

}  // namespace

Matrix empirical_reward_matrix(const ObservationBatch& batch) {
  if (batch.model != ObservationModel::Reward)
    throw InputError("empirical_reward_matrix: batch does not hold reward samples");
  if (batch.rewards.empty()) throw InputError("empirical_reward_matrix: empty batch");
  Matrix sums = Matrix::Zero(batch.m, batch.n);
  for (const RewardSample& s : batch.rewards) {
    if (s.i < 0 || s.i >= batch.m || s.j < 0 || s.j >= batch.n)
      throw InputError("empirical_reward_matrix: sample index out of range");
    sums(s.i, s.j) += s.y;
  }
  const double scale =
      static_cast<double>(batch.m) * batch.n / static_cast<double>(batch.rewards.size());
  return sums * scale;
}

Matrix estimate_reward(const ObservationBatch& batch, int r) {
  check_rank(r, std::min(batch.m, batch.n), "estimate_reward");
  return best_rank_r(empirical_reward_matrix(batch), r);
}

Matrix count_pairs(const ObservationBatch& batch, int n) {
  Matrix counts = Matrix::Zero(n, n);
  auto add = [&](int x, int y) {
    if (x < 0 || x >= n || y < 0 || y >= n) throw InputError("count_pairs: state out of range");
    counts(x, y) += 1.0;
  };
  std::size_t total = 0;
  if (batch.model == ObservationModel::TransitionPairs) {
    for (const auto& [x, y] : batch.pairs) add(x, y);
    total = batch.pairs.size();
  } else if (batch.model == ObservationModel::Trajectory) {
    for (std::size_t t = 0; t + 1 < batch.states.size(); ++t)
      add(batch.states[t], batch.states[t + 1]);
    total = batch.states.size() > 0 ? batch.states.size() - 1 : 0;
  } else {
    throw InputError("count_pairs: reward batches hold no transitions");
  }
  if (total == 0) throw InputError("count_pairs: no transitions");
  return counts / static_cast<double>(total);
}

Matrix normalize_rows(const Matrix& m_hat) {
  require_finite(m_hat, "normalize_rows");
  if (m_hat.rows() != m_hat.cols()) throw ShapeError("normalize_rows: matrix must be square");
  const Eigen::Index n = m_hat.cols();
  Matrix p(m_hat.rows(), n);
  for (Eigen::Index i = 0; i < m_hat.rows(); ++i) {
    const Eigen::RowVectorXd positive = m_hat.row(i).cwiseMax(0.0);
    const double mass = positive.sum();
    if (mass > 0.0) {
      p.row(i) = positive / mass;
    } else {
      p.row(i).setConstant(1.0 / static_cast<double>(n));
    }
  }
  return p;
}

FrequencyEstimate estimate_generative(const ObservationBatch& batch, int r) {
  if (batch.model != ObservationModel::TransitionPairs)
    throw InputError("estimate_generative: batch does not hold transition pairs");
  check_rank(r, batch.n, "estimate_generative");
  return from_counts(count_pairs(batch, batch.n), r, batch.T());
}

FrequencyEstimate estimate_forward_subset(const ObservationBatch& trajectory, int r, int tau,
                                          int k) {
  if (trajectory.model != ObservationModel::Trajectory)
    throw InputError("estimate_forward: batch is not a trajectory");
  const int n = trajectory.n;
  check_rank(r, n, "estimate_forward");
  const std::size_t T = trajectory.states.size();
  if (tau < 1) throw ParameterError("estimate_forward: tau must be positive");
  if (T < 2 * static_cast<std::size_t>(tau))
    throw ParameterError("estimate_forward: trajectory of length " + std::to_string(T) +
                         " is too short for tau = " + std::to_string(tau));
  if (k < 0 || k >= tau) throw ParameterError("estimate_forward: subset index out of range");

  const std::size_t strides = T / static_cast<std::size_t>(tau);
  Matrix counts = Matrix::Zero(n, n);
  std::size_t used = 0;
  for (std::size_t l = 0; l < strides; ++l) {
    const std::size_t t = static_cast<std::size_t>(k) + l * static_cast<std::size_t>(tau);
    if (t + 1 >= T) break;
    const int x = trajectory.states[t];
    const int y = trajectory.states[t + 1];
    if (x < 0 || x >= n || y < 0 || y >= n)
      throw InputError("estimate_forward: state out of range");
    counts(x, y) += 1.0;
    ++used;
  }
  FrequencyEstimate est = from_counts(counts / static_cast<double>(used), r, T);
  est.tau = tau;
  return est;
}

FrequencyEstimate estimate_forward(const ObservationBatch& trajectory, int r, int tau) {
  if (tau < 1) throw ParameterError("estimate_forward: tau must be positive");
  FrequencyEstimate aggregate;
  for (int k = 0; k < tau; ++k) {
    FrequencyEstimate part = estimate_forward_subset(trajectory, r, tau, k);
    if (k == 0) {
      aggregate = std::move(part);
      continue;
    }
    aggregate.M_hat += part.M_hat;
    aggregate.P_hat += part.P_hat;
    aggregate.M_tilde += part.M_tilde;
  }
  const double inv = 1.0 / static_cast<double>(tau);
  aggregate.M_hat *= inv;
  aggregate.P_hat *= inv;
  aggregate.M_tilde *= inv;
  aggregate.spectral_gap = gap_ratio(aggregate.M_tilde, r);
  aggregate.tau = tau;
  return aggregate;
}

int choose_tau(int tau_star, double T, double nu_min) {
  if (tau_star < 1 || !(T > 0.0)) throw ParameterError("choose_tau: inputs must be positive");
  if (!(nu_min > 0.0 && nu_min <= 1.0)) throw ParameterError("choose_tau: nu_min must lie in (0, 1]");
  const double value = std::ceil(2.0 * tau_star * std::log(T / nu_min));
  return std::max(1, static_cast<int>(value));
}

}  // namespace lowrank
