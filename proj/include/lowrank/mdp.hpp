#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lowrank/data_gen.hpp"
#include "lowrank/estimators.hpp"
#include "lowrank/linalg.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

/// Tabular discounted MDP whose per-action transition matrices have rank r.
struct MdpModel {
  int n = 0;
  int A = 0;
  int r = 0;
  double gamma = 0.9;
  /// chains[a].P is the transition matrix of action a.
  std::vector<MarkovChain> chains;

  std::vector<Matrix> transitions() const;
};

MdpModel make_low_rank_mdp(int n, int A, int r, double gamma, Rng& rng,
                           ChainStyle style = ChainStyle::DirichletFlat);
MdpModel mdp_from_transitions(const std::vector<Matrix>& P, int r, double gamma);

/// Reward table R(x, a), n x A, entries in [0, 1].
struct RewardFn {
  Matrix R;
};

RewardFn make_reward(Matrix R);
RewardFn random_reward(int n, int A, Rng& rng);
/// The n A rewards e_{x,a}.
std::vector<RewardFn> indicator_rewards(int n, int A);

struct PolicyValue {
  std::vector<int> policy;
  Vector V;
  int iterations = 0;
};

/// One trajectory of length floor(T / A) per action, started from the uniform law.
std::vector<ObservationBatch> collect_reward_free(const MdpModel& mdp, std::size_t T, Rng& rng);

/// choose_tau(tau_star(P^a), T / A, nu_min(P^a)) for each action.
std::vector<int> exploration_taus(const MdpModel& mdp, std::size_t T);

/// Forward estimator applied to each action's trajectory.
std::vector<FrequencyEstimate> estimate_mdp(const std::vector<ObservationBatch>& data, int r,
                                            std::span<const int> taus);

/// Iterates the Bellman optimality operator until successive iterates differ by
/// at most tol (1 - gamma) / (2 gamma) in sup norm; returns the greedy policy
/// of the last iterate (lowest action on ties).
PolicyValue value_iteration(const std::vector<Matrix>& P, const RewardFn& R, double gamma,
                            double tol = 1e-8);

/// Solves (I - gamma P^pi) V = R^pi.
Vector policy_evaluation(const std::vector<Matrix>& P, const RewardFn& R, double gamma,
                         std::span<const int> policy);

/// ||T V - V||_inf for the Bellman optimality operator T.
double bellman_residual(const std::vector<Matrix>& P, const RewardFn& R, double gamma,
                        const Vector& V);

struct GammaGapResult {
  std::vector<double> gaps;
  double max_gap = 0.0;
  /// 2 gamma / (1 - gamma)^2 * max_a ||P^a - P_hat^a||_{1->inf}
  double theorem5_bound = 0.0;
  std::vector<double> per_action_errors;
  double max_l1inf_err = 0.0;
};

/// For each reward, plans on P_hat and compares the true-model value of that
/// policy with the true optimum. Throws InvariantError if a gap exceeds the
/// bound by more than the value-iteration tolerance.
GammaGapResult gamma_gap(const MdpModel& mdp, const std::vector<Matrix>& P_hat,
                         const std::vector<RewardFn>& rewards, double gamma,
                         double tol = 1e-8);

}  // namespace lowrank
