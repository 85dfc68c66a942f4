#pragma once

#include <cstddef>

#include "lowrank/linalg.hpp"
#include "lowrank/observations.hpp"

namespace lowrank {

/// Spectral estimate of a frequency matrix and the transition matrix derived from it.
struct FrequencyEstimate {
  /// Rank-r estimate (for the forward model, the average of the subset estimates).
  Matrix M_hat;
  /// Row-stochastic estimate of P.
  Matrix P_hat;
  /// Empirical matrix the truncation was applied to (subset average for the forward model).
  Matrix M_tilde;
  int r = 0;
  int tau = 1;
  std::size_t T = 0;
  /// sigma_r / sigma_{r+1} of M_tilde; +inf when r is full rank or sigma_{r+1} = 0.
  double spectral_gap = 0.0;
};

/// Empirical reward matrix (nm / T) sum_t y_t 1{(i_t, j_t) = (i, j)}.
Matrix empirical_reward_matrix(const ObservationBatch& batch);

/// Model I estimator: best rank-r approximation of the empirical reward matrix.
Matrix estimate_reward(const ObservationBatch& batch, int r);

/// Normalized transition counts. Pairs are divided by the number of pairs;
/// a trajectory contributes its T - 1 consecutive transitions.
Matrix count_pairs(const ObservationBatch& batch, int n);

/// Row i becomes (M_i)_+ / ||(M_i)_+||_1, or the uniform row when the positive
/// part vanishes.
Matrix normalize_rows(const Matrix& m_hat);

/// Model II(a) estimator.
FrequencyEstimate estimate_generative(const ObservationBatch& batch, int r);

/// Model II(b) estimator for subset k in [0, tau): transitions starting at
/// positions k, k + tau, k + 2 tau, ... (0-based) among the first floor(T/tau)
/// strides, dropping a final pair that would run past the trajectory.
FrequencyEstimate estimate_forward_subset(const ObservationBatch& trajectory, int r, int tau,
                                          int k);

/// Model II(b) estimator: averages M_hat and P_hat over the tau subsets.
FrequencyEstimate estimate_forward(const ObservationBatch& trajectory, int r, int tau);

/// ceil(2 tau_star ln(T / nu_min)), at least 1.
int choose_tau(int tau_star, double T, double nu_min);

}  // namespace lowrank
