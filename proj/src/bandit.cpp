#include "lowrank/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lowrank/config.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kTwo63 = 9223372036854775808.0;

using Entry = std::pair<int, int>;

double epoch_budget_real(int l, int m, int n, double delta, double C) {
  const double dims = static_cast<double>(m) + n;
  const double delta_l = delta / (static_cast<double>(l) * l);
  // ln(2^{2l+4} (m+n) / delta_l) as a sum so large l cannot overflow the argument.
  const double log_term = (2.0 * l + 4.0) * std::numbers::ln2 + std::log(dims) - std::log(delta_l);
  return C * std::pow(4.0, l + 2) * dims * log_term * log_term * log_term;
}

// Lowest (row, col) wins ties.
Entry argmax_over(const Matrix& a, const std::vector<Entry>& entries) {
  Entry best = entries.front();
  for (const Entry& e : entries)
    if (a(e.first, e.second) > a(best.first, best.second)) best = e;
  return best;
}

std::vector<Entry> full_grid(int m, int n) {
  std::vector<Entry> grid;
  grid.reserve(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) grid.emplace_back(i, j);
  return grid;
}

// Uniform pulls over the grid; returns the rank-r estimate of M.
Matrix explore_uniform(BanditEnv& env, Rng& rng, std::uint64_t pulls, int r) {
  const int m = env.rows();
  const int n = env.cols();
  const std::uint64_t cells = static_cast<std::uint64_t>(m) * n;
  Matrix sums = Matrix::Zero(m, n);
  for (std::uint64_t t = 0; t < pulls; ++t) {
    const std::uint64_t idx = rng.uniform_index(cells);
    const int i = static_cast<int>(idx / n);
    const int j = static_cast<int>(idx % n);
    sums(i, j) += env.pull(i, j);
  }
  return best_rank_r(sums * (static_cast<double>(cells) / static_cast<double>(pulls)), r);
}

void check_rank(int r, const BanditEnv& env, const char* who) {
  if (r < 1 || r > std::min(env.rows(), env.cols()))
    throw ParameterError(std::string(who) + ": rank out of range");
}

}  // namespace

GapStats gap_stats(const Matrix& m) {
  require_finite(m, "gap_stats");
  if (m.size() == 0) throw ShapeError("gap_stats: empty matrix");
  GapStats s;
  const std::vector<Entry> grid = full_grid(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  const Entry best = argmax_over(m, grid);
  const double top = m(best.first, best.second);
  s.best_i = best.first;
  s.best_j = best.second;
  s.gaps = (-m).array() + top;
  double min_positive = std::numeric_limits<double>::infinity();
  for (const Entry& e : grid) {
    if (e == best) continue;
    const double gap = s.gaps(e.first, e.second);
    if (gap <= kTolerances.gap_tie)
      throw TieError("gap_stats: maximum attained at (" + std::to_string(best.first) + ", " +
                     std::to_string(best.second) + ") and (" + std::to_string(e.first) + ", " +
                     std::to_string(e.second) + ")");
    min_positive = std::min(min_positive, gap);
  }
  s.gaps(best.first, best.second) = 0.0;
  s.delta_min = m.size() == 1 ? 0.0 : min_positive;
  s.delta_max = s.gaps.maxCoeff();
  s.delta_bar = s.gaps.mean();
  return s;
}

std::uint64_t epoch_budget(int l, int m, int n, double delta, double C) {
  if (l < 1) throw ParameterError("epoch_budget: epoch index must be at least 1");
  if (m < 1 || n < 1) throw ParameterError("epoch_budget: dimensions must be positive");
  if (!(delta > 0.0) || !(C > 0.0)) throw ParameterError("epoch_budget: delta and C must be positive");
  const double value = std::ceil(epoch_budget_real(l, m, n, delta, C));
  if (!(value < kTwo63))
    throw BudgetOverflowError("epoch_budget: epoch " + std::to_string(l) + " exceeds 2^63 pulls");
  return static_cast<std::uint64_t>(value);
}

BanditEnv::BanditEnv(LowRankMatrix truth, NoiseSpec noise, std::uint64_t seed)
    : truth_(std::move(truth)), noise_(noise), rng_(seed) {
  gaps_ = gap_stats(truth_.matrix);
  scale_ = truth_.max_abs();
}

double BanditEnv::pull(int i, int j) {
  if (i < 0 || i >= rows() || j < 0 || j >= cols())
    throw InputError("BanditEnv::pull: entry out of range");
  const double y = truth_.matrix(i, j) + noise_.draw(scale_, rng_);
  ++pulls_;
  pseudo_regret_ += gaps_.gaps(i, j);
  reward_sum_ += y;
  if (recording_) trajectory_.push_back(pseudo_regret_);
  return y;
}

double BanditEnv::noisy_regret() const {
  return static_cast<double>(pulls_) * truth_.matrix(gaps_.best_i, gaps_.best_j) - reward_sum_;
}

void BanditEnv::reset_accounting() {
  pulls_ = 0;
  pseudo_regret_ = 0.0;
  reward_sum_ = 0.0;
  trajectory_.clear();
}

SmeAeTrace sme_ae(BanditEnv& env, double delta, double C, int r, std::uint64_t max_budget) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("sme_ae: delta must lie in (0, 1)");
  if (!(C > 0.0)) throw ParameterError("sme_ae: C must be positive");
  check_rank(r, env, "sme_ae");
  const int m = env.rows();
  const int n = env.cols();
  const Entry best{env.gaps().best_i, env.gaps().best_j};
  const std::vector<Entry> grid = full_grid(m, n);

  SmeAeTrace trace;
  std::vector<Entry> active = grid;
  Rng& sampler = env.rng();
  std::optional<Matrix> last_estimate;

  for (int l = 1; active.size() > 1; ++l) {
    const std::uint64_t remaining = max_budget - trace.tau;
    const double planned = std::ceil(epoch_budget_real(l, m, n, delta, C));
    std::uint64_t budget = 0;
    if (planned > static_cast<double>(remaining)) {
      trace.truncated = true;
      budget = remaining;
    } else {
      budget = static_cast<std::uint64_t>(planned);
    }
    if (budget == 0) {
      trace.recommendation = last_estimate ? argmax_over(*last_estimate, active) : active.front();
      break;
    }

    const Matrix m_hat = explore_uniform(env, sampler, budget, r);
    trace.tau += budget;
    last_estimate = m_hat;

    SmeAeEpoch epoch;
    epoch.l = l;
    epoch.delta_l = delta / (static_cast<double>(l) * l);
    epoch.T_l = budget;
    epoch.active_before = active.size();
    epoch.m_hat_argmax = argmax_over(m_hat, grid);
    epoch.m_hat_max = m_hat(epoch.m_hat_argmax.first, epoch.m_hat_argmax.second);
    epoch.estimate_error = (m_hat - env.truth().matrix).cwiseAbs().maxCoeff();

    const double threshold = std::ldexp(1.0, -(l + 2));
    double worst_deviation = 0.0;
    std::vector<Entry> next;
    for (const Entry& e : active) {
      const double gap_hat = epoch.m_hat_max - m_hat(e.first, e.second);
      worst_deviation =
          std::max(worst_deviation, std::abs(gap_hat - env.gaps().gaps(e.first, e.second)));
      if (gap_hat <= threshold) next.push_back(e);
    }
    epoch.good_event = worst_deviation <= threshold;

    if (trace.truncated) {
      epoch.active_after = active.size();
      epoch.active = active;
      trace.epochs.push_back(epoch);
      trace.recommendation = argmax_over(m_hat, active);
      break;
    }
    if (next.empty()) {
      next.push_back(argmax_over(m_hat, active));
      epoch.fallback = true;
    }
    const bool had_best = std::find(active.begin(), active.end(), best) != active.end();
    const bool keeps_best = std::find(next.begin(), next.end(), best) != next.end();
    if (epoch.good_event && had_best && !keeps_best)
      throw InvariantError("sme_ae: best entry pruned in epoch " + std::to_string(l) +
                           " although the good event holds");
    epoch.active_after = next.size();
    epoch.active = next;
    trace.epochs.push_back(epoch);
    active = std::move(next);
  }
  if (!trace.truncated && active.size() == 1) trace.recommendation = active.front();
  trace.correct = trace.recommendation == best;
  return trace;
}

RegretTrace run_regret(BanditEnv& env, const Policy& policy, std::uint64_t T) {
  if (T < 1) throw ParameterError("run_regret: horizon must be at least 1");
  env.reset_accounting();
  env.record_trajectory(true);
  RegretTrace out;
  const int m = env.rows();
  const int n = env.cols();
  const Entry best{env.gaps().best_i, env.gaps().best_j};
  Rng& sampler = env.rng();

  auto commit = [&](Entry e) {
    out.commitment = e;
    while (env.pulls() < T) env.pull(e.first, e.second);
  };

  if (const auto* p = std::get_if<policy::SmeAeCommit>(&policy)) {
    const double delta = p->delta > 0.0 ? p->delta : 1.0 / (static_cast<double>(T) * T);
    SmeAeTrace trace = sme_ae(env, delta, p->C, p->r, T);
    out.tau = trace.tau;
    commit(trace.recommendation);
    out.sme_ae = std::move(trace);
  } else if (const auto* p = std::get_if<policy::Etc>(&policy)) {
    check_rank(p->r, env, "run_regret");
    std::uint64_t explore = p->explore_T;
    if (explore == 0)
      explore = static_cast<std::uint64_t>(
          std::ceil(std::pow(static_cast<double>(T), 2.0 / 3.0) * std::cbrt(m + n)));
    explore = std::clamp<std::uint64_t>(explore, 1, T);
    const Matrix m_hat = explore_uniform(env, sampler, explore, p->r);
    out.tau = explore;
    commit(argmax_over(m_hat, full_grid(m, n)));
  } else if (std::holds_alternative<policy::UniformRandom>(policy)) {
    const std::uint64_t cells = static_cast<std::uint64_t>(m) * n;
    for (std::uint64_t t = 0; t < T; ++t) {
      const std::uint64_t idx = sampler.uniform_index(cells);
      env.pull(static_cast<int>(idx / n), static_cast<int>(idx % n));
    }
  } else {
    const auto& p = std::get<policy::FixedEntry>(policy);
    commit({p.i, p.j});
  }

  out.correct = out.commitment.has_value() && *out.commitment == best;
  out.pseudo_regret = env.pseudo_regret();
  out.noisy_regret = env.noisy_regret();
  out.cumulative = env.trajectory();
  env.record_trajectory(false);
  return out;
}

double psi_bound(int m, int n, double delta, double delta_min, double c) {
  if (!(delta_min > 0.0 && delta_min <= 1.0))
    throw ParameterError("psi_bound: delta_min must lie in (0, 1]");
  if (!(delta > 0.0)) throw ParameterError("psi_bound: delta must be positive");
  const double dims = static_cast<double>(m) + n;
  const double gap_log = std::log(kE / delta_min);
  const double inner = std::log(kE * dims * gap_log / (delta_min * delta));
  return c * dims * gap_log / (delta_min * delta_min) * inner * inner * inner;
}

RegretBound regret_bound(int m, int n, double T, const GapStats& stats, double c) {
  if (!(T >= 1.0)) throw ParameterError("regret_bound: horizon must be at least 1");
  RegretBound out;
  if (stats.delta_min <= 0.0) return out;
  out.gap_dependent = stats.delta_bar * (psi_bound(m, n, 1.0 / (T * T), stats.delta_min, c) + 1.0) +
                      stats.delta_max / T;
  out.zeta = stats.delta_max / stats.delta_min;
  const double dims = static_cast<double>(m) + n;
  constexpr int kGrid = 4000;
  constexpr double kLowExp = -12.0;
  for (int k = 0; k <= kGrid; ++k) {
    const double gap = std::pow(10.0, kLowExp * (1.0 - static_cast<double>(k) / kGrid));
    const double gap_log = std::log(kE / gap);
    const double inner = std::log(kE * dims * gap_log * T * T / gap);
    const double dependent =
        out.zeta * c * dims * gap_log / gap * inner * inner * inner + out.zeta * gap / T;
    const double linear = out.zeta * gap * T;
    const double value = std::min(dependent, linear);
    if (value > out.gap_independent) {
      out.gap_independent = value;
      out.worst_gap = gap;
    }
  }
  return out;
}

}  // namespace lowrank
