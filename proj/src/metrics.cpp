#include "lowrank/metrics.hpp"

#include <cmath>
#include <numbers>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

constexpr double kE = std::numbers::e;

void require_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(who) + ": truth and estimate differ in shape");
}

// Shared tail of the generative and forward bounds; `scale_min` is (nu0)_min
// or nu_min respectively.
void fill_transition_bounds(TransitionBounds& out, const BoundInputs& b, double big_b,
                            double scale_min, bool tight) {
  const double sqrt_n = std::sqrt(b.n);
  out.B = big_b;
  out.bound_m_two_to_inf = b.kappa * big_b;
  out.bound_p_one_to_inf = b.kappa * sqrt_n / scale_min * big_b;
  if (!tight) {
    const double spread = b.kappa * b.mu * b.mu * b.r;
    out.bound_subspace = spread / (b.n * b.M_inf) * big_b;
    out.bound_m_entry = spread / sqrt_n * big_b;
    out.bound_p_entry = big_b / scale_min *
                        (sqrt_n * b.kappa * b.M_inf / scale_min +
                         (1.0 + b.kappa * big_b / (sqrt_n * b.M_inf)) * spread / sqrt_n);
  } else {
    const double ratio = (b.M_two_to_inf + b.kappa * big_b) / b.sigma_r;
    const double incoherent = b.kappa * b.mu * std::sqrt(b.r / b.n);
    out.bound_subspace = big_b / b.sigma_r;
    out.bound_m_entry = (ratio + incoherent) * big_b;
    out.bound_p_entry =
        big_b / scale_min * (sqrt_n * b.kappa * b.M_inf / scale_min + ratio + incoherent);
  }
}

}  // namespace

ErrorPanel error_panel(const Matrix& truth, const Matrix& estimate, int r) {
  require_same_shape(truth, estimate, "error_panel");
  const Matrix diff = estimate - truth;
  ErrorPanel p;
  p.spectral = norm(diff, NormKind::Spectral);
  p.two_to_inf = norm(diff, NormKind::TwoToInf);
  p.one_to_inf = norm(diff, NormKind::OneToInf);
  p.entry_max = norm(diff, NormKind::EntryMax);
  const SvdFactors t = svd(truth, r);
  const SvdFactors e = svd(estimate, r);
  p.subspace_u = subspace_error(t.U, e.U, Alignment::RawProjection);
  p.subspace_v = subspace_error(t.V, e.V, Alignment::RawProjection);
  p.subspace_u_sign = subspace_error(t.U, e.U, Alignment::SignSvd);
  p.subspace_v_sign = subspace_error(t.V, e.V, Alignment::SignSvd);
  return p;
}

ErrorPanel error_panel(const LowRankMatrix& truth, const Matrix& estimate) {
  require_same_shape(truth.matrix, estimate, "error_panel");
  ErrorPanel p = error_panel(truth.matrix, estimate, truth.r);
  // The cached factors are the canonical truth basis.
  const SvdFactors e = svd(estimate, truth.r);
  p.subspace_u = subspace_error(truth.factors.U, e.U, Alignment::RawProjection);
  p.subspace_v = subspace_error(truth.factors.V, e.V, Alignment::RawProjection);
  p.subspace_u_sign = subspace_error(truth.factors.U, e.U, Alignment::SignSvd);
  p.subspace_v_sign = subspace_error(truth.factors.V, e.V, Alignment::SignSvd);
  return p;
}

ErrorPanel error_panel(const Matrix& target_m, const Matrix& target_p,
                       const FrequencyEstimate& estimate) {
  require_same_shape(target_p, estimate.P_hat, "error_panel");
  ErrorPanel p = error_panel(target_m, estimate.M_hat, estimate.r);
  const Matrix diff = estimate.P_hat - target_p;
  p.p_one_to_inf = norm(diff, NormKind::OneToInf);
  p.p_entry_max = norm(diff, NormKind::EntryMax);
  return p;
}

ErrorPanel error_panel(const MarkovChain& truth, const FrequencyEstimate& estimate) {
  return error_panel(truth.M, truth.P, estimate);
}

BoundInputs bound_inputs(const LowRankMatrix& truth, double T, double delta) {
  BoundInputs b;
  b.m = truth.rows();
  b.n = truth.cols();
  b.r = truth.r;
  b.T = T;
  b.delta = delta;
  b.mu = truth.mu;
  b.kappa = truth.kappa;
  b.M_inf = truth.max_abs();
  b.sigma_r = truth.factors.sigma(truth.r - 1);
  b.M_two_to_inf = norm(truth.matrix, NormKind::TwoToInf);
  b.M_one_to_inf = norm(truth.matrix, NormKind::OneToInf);
  b.Mt_one_to_inf = norm(truth.matrix.transpose(), NormKind::OneToInf);
  b.row_inf_min = truth.matrix.cwiseAbs().rowwise().maxCoeff().minCoeff();
  return b;
}

BoundInputs bound_inputs(const MarkovChain& chain, double T, double delta, const Vector& nu0) {
  BoundInputs b = bound_inputs(low_rank_from_matrix(chain.M, chain.r), T, delta);
  b.nu_min = chain.nu.minCoeff();
  b.nu_max = chain.nu.maxCoeff();
  b.nu0_min = nu0.size() > 0 ? nu0.minCoeff() : b.nu_min;
  b.tau_star = chain.tau_star.value_or(1);
  return b;
}

RewardBounds bound_model1(const BoundInputs& b) {
  const double log_term = std::log(kE * (b.n + b.m) * b.T / b.delta);
  const double min_dim = std::min(b.m, b.n);
  RewardBounds out;
  out.B = std::sqrt(b.n * b.m / b.T) *
          (std::sqrt((b.n + b.m) * log_term) + std::pow(log_term, 1.5));
  const double core = std::pow(b.mu, 3) * b.kappa * b.kappa * std::pow(b.r, 1.5);
  out.bound_subspace = core / std::sqrt(b.m * b.n * min_dim) * out.B;
  out.bound_two_to_inf = core / std::sqrt(min_dim) * b.M_inf * out.B;
  out.bound_entry = (std::pow(b.mu, 5.5) * b.kappa * b.kappa * std::sqrt(b.r) +
                     std::pow(b.mu, 3) * b.kappa * std::pow(b.r, 1.5) * (b.m + b.n) /
                         std::sqrt(b.m * b.n)) /
                    min_dim * b.M_inf * out.B;
  out.T_min = std::pow(b.mu, 4) * b.kappa * b.kappa * b.r * b.r * (b.n + b.m) *
              std::pow(log_term, 3);
  return out;
}

double g_delta(double delta, double n, double m_inf, double row_inf_min) {
  if (row_inf_min <= 1.0) return std::log(n * kE / delta) / std::log1p(1.0 / m_inf);
  return std::log(m_inf * n * kE / delta) * std::sqrt(m_inf);
}

TransitionBounds bound_generative(const BoundInputs& b, bool tight) {
  const double log_term = std::log(b.n * std::sqrt(b.T) / b.delta);
  TransitionBounds out;
  double big_b = b.mu * b.kappa * std::sqrt(b.r * b.M_inf / b.T * log_term);
  if (tight) {
    const double a = std::sqrt(b.M_one_to_inf + b.Mt_one_to_inf) / std::sqrt(b.T);
    const double g = g_delta(b.delta / std::sqrt(b.T), b.n, b.T * b.M_inf, b.T * b.row_inf_min);
    big_b = b.mu * b.kappa * std::sqrt(b.r / b.n) * (a + g * log_term / b.T) +
            std::sqrt(b.r * b.M_inf / b.T * log_term);
  }
  fill_transition_bounds(out, b, big_b, b.nu0_min, tight);

  const double coherence = std::pow(b.mu * b.kappa, 6) * std::pow(b.r, 3);
  const double sparse = b.T * b.row_inf_min <= 1.0
                            ? log_term / std::log1p(1.0 / (b.T * b.M_inf))
                            : 0.0;
  out.T_requirement = b.n * log_term * std::max(coherence, sparse);
  out.n_condition_lhs = b.n;
  out.n_condition_rhs = std::pow(std::log(b.n * std::pow(b.T, 1.5) / b.delta), 2);
  return out;
}

TransitionBounds bound_forward(const BoundInputs& b, bool tight) {
  const double t_tau = b.T_tau > 0 ? b.T_tau : b.T;
  const double log_term = std::log(b.n * std::sqrt(t_tau) / b.delta);
  const double mixing_log = std::log(b.T / b.nu_min);
  TransitionBounds out;
  const double main =
      std::sqrt(b.r * b.tau_star * b.M_inf / b.T * log_term * mixing_log);
  double big_b = b.mu * b.kappa * main;
  if (tight) {
    const double spread =
        std::sqrt(b.nu_max * b.tau_star / b.T * std::log(b.n * kE / b.delta) * mixing_log);
    const double g =
        g_delta(b.delta / std::sqrt(t_tau), b.n, t_tau * b.M_inf, t_tau * b.row_inf_min);
    big_b = b.mu * b.kappa * std::sqrt(b.r / b.n) *
                (spread + b.tau_star / b.T * g * log_term * mixing_log) +
            main;
  }
  fill_transition_bounds(out, b, big_b, b.nu_min, tight);

  const double coherence = std::pow(b.mu * b.kappa, 6) * std::pow(b.r, 3);
  const double sparse_den = std::log1p(1.0 / (t_tau * b.M_inf));
  const double sparse = t_tau * b.row_inf_min <= 1.0
                            ? log_term * log_term / (sparse_den * sparse_den)
                            : 0.0;
  out.T_requirement = b.n * b.tau_star * std::log(b.n * std::sqrt(b.T) / b.delta) * mixing_log *
                      std::max(coherence, sparse);
  out.n_condition_lhs = b.n;
  out.n_condition_rhs = b.tau_star *
                        std::pow(std::log(b.n * std::pow(b.T, 1.5) / b.delta), 1.5) *
                        std::sqrt(mixing_log);
  return out;
}

}  // namespace lowrank
