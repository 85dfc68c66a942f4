#include "lowrank/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

void check_gamma(double gamma, const char* who) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError(std::string(who) + ": gamma must lie in (0, 1)");
}

void check_model(const std::vector<Matrix>& P, const RewardFn& R, const char* who) {
  if (P.empty()) throw ShapeError(std::string(who) + ": no actions");
  const Eigen::Index n = P.front().rows();
  for (const Matrix& p : P)
    if (p.rows() != n || p.cols() != n)
      throw ShapeError(std::string(who) + ": transition matrices must be n x n");
  if (R.R.rows() != n || R.R.cols() != static_cast<Eigen::Index>(P.size()))
    throw ShapeError(std::string(who) + ": reward table must be n x A");
}

// Q(x, a) = R(x, a) + gamma (P^a V)(x)
Matrix q_values(const std::vector<Matrix>& P, const RewardFn& R, double gamma, const Vector& V) {
  Matrix q = R.R;
  for (std::size_t a = 0; a < P.size(); ++a) q.col(static_cast<Eigen::Index>(a)) += gamma * (P[a] * V);
  return q;
}

}  // namespace

std::vector<Matrix> MdpModel::transitions() const {
  std::vector<Matrix> out;
  out.reserve(chains.size());
  for (const MarkovChain& c : chains) out.push_back(c.P);
  return out;
}

MdpModel make_low_rank_mdp(int n, int A, int r, double gamma, Rng& rng, ChainStyle style) {
  check_gamma(gamma, "make_low_rank_mdp");
  if (A < 1) throw ParameterError("make_low_rank_mdp: need at least one action");
  MdpModel mdp;
  mdp.n = n;
  mdp.A = A;
  mdp.r = r;
  mdp.gamma = gamma;
  for (int a = 0; a < A; ++a) mdp.chains.push_back(make_low_rank_chain(n, r, rng, style));
  return mdp;
}

MdpModel mdp_from_transitions(const std::vector<Matrix>& P, int r, double gamma) {
  check_gamma(gamma, "mdp_from_transitions");
  if (P.empty()) throw ParameterError("mdp_from_transitions: need at least one action");
  MdpModel mdp;
  mdp.n = static_cast<int>(P.front().rows());
  mdp.A = static_cast<int>(P.size());
  mdp.r = r;
  mdp.gamma = gamma;
  ChainOptions options;
  options.rank = r;
  for (const Matrix& p : P) mdp.chains.push_back(chain_from_transition(p, options));
  return mdp;
}

RewardFn make_reward(Matrix R) {
  require_finite(R, "make_reward");
  if (R.size() > 0 && (R.minCoeff() < 0.0 || R.maxCoeff() > 1.0))
    throw InputError("make_reward: rewards must lie in [0, 1]");
  return RewardFn{std::move(R)};
}

RewardFn random_reward(int n, int A, Rng& rng) {
  Matrix R(n, A);
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < A; ++a) R(x, a) = rng.uniform();
  return RewardFn{std::move(R)};
}

std::vector<RewardFn> indicator_rewards(int n, int A) {
  std::vector<RewardFn> out;
  out.reserve(static_cast<std::size_t>(n) * A);
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < A; ++a) {
      Matrix R = Matrix::Zero(n, A);
      R(x, a) = 1.0;
      out.push_back(RewardFn{std::move(R)});
    }
  return out;
}

std::vector<ObservationBatch> collect_reward_free(const MdpModel& mdp, std::size_t T, Rng& rng) {
  const std::size_t actions = mdp.chains.size();
  if (actions == 0) throw ParameterError("collect_reward_free: no actions");
  if (T < 2 * actions)
    throw ParameterError("collect_reward_free: budget " + std::to_string(T) +
                         " is below 2A = " + std::to_string(2 * actions));
  const std::vector<double> uniform(static_cast<std::size_t>(mdp.n), 1.0 / mdp.n);
  std::vector<ObservationBatch> out;
  out.reserve(actions);
  for (const MarkovChain& chain : mdp.chains)
    out.push_back(sample_trajectory(chain, uniform, T / actions, rng));
  return out;
}

std::vector<int> exploration_taus(const MdpModel& mdp, std::size_t T) {
  const double per_action = static_cast<double>(T / mdp.chains.size());
  std::vector<int> taus;
  for (const MarkovChain& chain : mdp.chains) {
    if (!chain.tau_star) throw NonMixingError("exploration_taus: chain has no mixing time");
    taus.push_back(choose_tau(*chain.tau_star, per_action, chain.nu_min()));
  }
  return taus;
}

std::vector<FrequencyEstimate> estimate_mdp(const std::vector<ObservationBatch>& data, int r,
                                            std::span<const int> taus) {
  if (taus.size() != data.size())
    throw ShapeError("estimate_mdp: one tau per action is required");
  std::vector<FrequencyEstimate> out;
  out.reserve(data.size());
  for (std::size_t a = 0; a < data.size(); ++a) out.push_back(estimate_forward(data[a], r, taus[a]));
  return out;
}

PolicyValue value_iteration(const std::vector<Matrix>& P, const RewardFn& R, double gamma,
                            double tol) {
  check_model(P, R, "value_iteration");
  check_gamma(gamma, "value_iteration");
  if (!(tol > 0.0)) throw ParameterError("value_iteration: tol must be positive");
  const double stop = tol * (1.0 - gamma) / (2.0 * gamma);
  PolicyValue out;
  Vector V = Vector::Zero(P.front().rows());
  for (;;) {
    const Vector next = q_values(P, R, gamma, V).rowwise().maxCoeff();
    ++out.iterations;
    const double change = (next - V).cwiseAbs().maxCoeff();
    V = next;
    if (change <= stop) break;
  }
  const Matrix q = q_values(P, R, gamma, V);
  out.policy.resize(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index x = 0; x < q.rows(); ++x) {
    int best = 0;
    for (Eigen::Index a = 1; a < q.cols(); ++a)
      if (q(x, a) > q(x, best)) best = static_cast<int>(a);
    out.policy[static_cast<std::size_t>(x)] = best;
  }
  out.V = std::move(V);
  return out;
}

Vector policy_evaluation(const std::vector<Matrix>& P, const RewardFn& R, double gamma,
                         std::span<const int> policy) {
  check_model(P, R, "policy_evaluation");
  check_gamma(gamma, "policy_evaluation");
  const Eigen::Index n = P.front().rows();
  if (static_cast<Eigen::Index>(policy.size()) != n)
    throw ShapeError("policy_evaluation: policy must assign an action to every state");
  Matrix system = Matrix::Identity(n, n);
  Vector rhs(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const int a = policy[static_cast<std::size_t>(x)];
    if (a < 0 || a >= static_cast<int>(P.size()))
      throw InputError("policy_evaluation: action out of range");
    system.row(x) -= gamma * P[static_cast<std::size_t>(a)].row(x);
    rhs(x) = R.R(x, a);
  }
  return system.partialPivLu().solve(rhs);
}

double bellman_residual(const std::vector<Matrix>& P, const RewardFn& R, double gamma,
                        const Vector& V) {
  check_model(P, R, "bellman_residual");
  const Vector next = q_values(P, R, gamma, V).rowwise().maxCoeff();
  return (next - V).cwiseAbs().maxCoeff();
}

GammaGapResult gamma_gap(const MdpModel& mdp, const std::vector<Matrix>& P_hat,
                         const std::vector<RewardFn>& rewards, double gamma, double tol) {
  if (rewards.empty()) throw ParameterError("gamma_gap: no rewards");
  if (P_hat.size() != mdp.chains.size())
    throw ShapeError("gamma_gap: one estimate per action is required");
  const std::vector<Matrix> P = mdp.transitions();

  GammaGapResult out;
  for (std::size_t a = 0; a < P.size(); ++a) {
    if (P_hat[a].rows() != P[a].rows() || P_hat[a].cols() != P[a].cols())
      throw ShapeError("gamma_gap: estimate shape differs from the model");
    out.per_action_errors.push_back(norm(P[a] - P_hat[a], NormKind::OneToInf));
  }
  out.max_l1inf_err = *std::max_element(out.per_action_errors.begin(), out.per_action_errors.end());
  out.theorem5_bound = 2.0 * gamma / ((1.0 - gamma) * (1.0 - gamma)) * out.max_l1inf_err;

  for (std::size_t k = 0; k < rewards.size(); ++k) {
    const RewardFn& R = rewards[k];
    const PolicyValue optimal = value_iteration(P, R, gamma, tol);
    const PolicyValue planned = value_iteration(P_hat, R, gamma, tol);
    const Vector v_opt = policy_evaluation(P, R, gamma, optimal.policy);
    const Vector v_hat = policy_evaluation(P, R, gamma, planned.policy);
    const double gap = (v_opt - v_hat).cwiseAbs().maxCoeff();
    if (gap > out.theorem5_bound + tol)
      throw InvariantError("gamma_gap: reward " + std::to_string(k) + " has gap " +
                           std::to_string(gap) + " above the bound " +
                           std::to_string(out.theorem5_bound));
    out.gaps.push_back(gap);
    out.max_gap = std::max(out.max_gap, gap);
  }
  return out;
}

}  // namespace lowrank
