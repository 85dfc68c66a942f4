#pragma once

#include <optional>

#include "lowrank/data_gen.hpp"
#include "lowrank/estimators.hpp"
#include "lowrank/linalg.hpp"

namespace lowrank {

/// Estimation errors against ground truth. The matrix norms are of M_hat - M;
/// the p_* fields of P_hat - P when a transition estimate exists.
struct ErrorPanel {
  double spectral = 0.0;
  double two_to_inf = 0.0;
  double one_to_inf = 0.0;
  double entry_max = 0.0;
  std::optional<double> p_one_to_inf;
  std::optional<double> p_entry_max;
  /// RawProjection alignment (the default for rate comparisons).
  double subspace_u = 0.0;
  double subspace_v = 0.0;
  /// SignSvd (Procrustes) alignment, reported alongside.
  double subspace_u_sign = 0.0;
  double subspace_v_sign = 0.0;
};

/// Errors of a rank-r estimate of `truth`. Subspace errors compare the top-r
/// singular vectors of truth and estimate.
ErrorPanel error_panel(const Matrix& truth, const Matrix& estimate, int r);
ErrorPanel error_panel(const LowRankMatrix& truth, const Matrix& estimate);

/// Errors of a frequency estimate against an explicit target M (e.g.
/// diag(nu0) P for the generative model) and transition matrix P.
ErrorPanel error_panel(const Matrix& target_m, const Matrix& target_p,
                       const FrequencyEstimate& estimate);
ErrorPanel error_panel(const MarkovChain& truth, const FrequencyEstimate& estimate);

/// Inputs of the closed-form error bounds. Universal constants are set to 1,
/// so the bounds describe shapes and rates, not absolute values.
struct BoundInputs {
  double m = 1, n = 1, r = 1;
  double T = 1;
  double delta = 0.1;
  double mu = 1, kappa = 1;
  /// ||M||_inf
  double M_inf = 1;
  double tau_star = 1;
  double nu_min = 1;
  double nu0_min = 1;
  /// floor(T / tau) for the forward model; 0 means use T.
  double T_tau = 0;

  // Only read by the tight variants.
  double sigma_r = 1;
  double M_two_to_inf = 1;
  double M_one_to_inf = 1;
  double Mt_one_to_inf = 1;
  /// min over rows l of ||M_{l,:}||_inf
  double row_inf_min = 1;
  double nu_max = 1;
};

/// Fills the structural fields of BoundInputs from a chain (target M = diag(nu) P).
BoundInputs bound_inputs(const MarkovChain& chain, double T, double delta,
                         const Vector& nu0);
BoundInputs bound_inputs(const LowRankMatrix& truth, double T, double delta);

struct RewardBounds {
  double B = 0;
  double bound_subspace = 0;
  double bound_two_to_inf = 0;
  double bound_entry = 0;
  /// mu^4 kappa^2 r^2 (n + m) ln^3(e (m + n) T / delta)
  double T_min = 0;
};

RewardBounds bound_model1(const BoundInputs& b);

struct TransitionBounds {
  double B = 0;
  double bound_subspace = 0;
  double bound_m_two_to_inf = 0;
  double bound_p_one_to_inf = 0;
  double bound_m_entry = 0;
  double bound_p_entry = 0;
  /// Sample-size requirement (g for the generative model, h for the forward model).
  double T_requirement = 0;
  /// Both sides of the condition on n, reported rather than enforced.
  double n_condition_lhs = 0;
  double n_condition_rhs = 0;
};

/// g_delta(M) of the tight statements, evaluated on the matrix summarized by
/// its entry max and smallest row max.
double g_delta(double delta, double n, double m_inf, double row_inf_min);

/// Generative-model bounds; `tight` replaces B by the unsimplified B'.
TransitionBounds bound_generative(const BoundInputs& b, bool tight = false);

/// Forward-model bounds, with nu_min in place of (nu0)_min.
TransitionBounds bound_forward(const BoundInputs& b, bool tight = false);

}  // namespace lowrank
