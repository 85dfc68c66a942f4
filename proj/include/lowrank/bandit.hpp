#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "lowrank/data_gen.hpp"
#include "lowrank/linalg.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

/// Gaps Delta_ij = M_max - M_ij of a matrix with a unique maximizer.
struct GapStats {
  /// Smallest positive gap; 0 for a 1 x 1 matrix.
  double delta_min = 0.0;
  double delta_max = 0.0;
  /// Mean gap over all mn entries, the best one included.
  double delta_bar = 0.0;
  int best_i = 0;
  int best_j = 0;
  Matrix gaps;
};

/// Throws TieError when the maximum is attained twice within 1e-12.
GapStats gap_stats(const Matrix& m);

/// ceil(C (2^{l+2})^2 (m+n) ln^3(2^{2l+4} (m+n) / delta_l)), delta_l = delta / l^2.
/// Throws BudgetOverflowError above 2^63.
std::uint64_t epoch_budget(int l, int m, int n, double delta, double C);

/// Entry-pulling environment with gap-based regret accounting.
class BanditEnv {
 public:
  BanditEnv(LowRankMatrix truth, NoiseSpec noise, std::uint64_t seed);

  /// Returns M_ij + xi and charges Delta_ij to the pseudo-regret.
  double pull(int i, int j);

  const LowRankMatrix& truth() const { return truth_; }
  const GapStats& gaps() const { return gaps_; }
  int rows() const { return truth_.rows(); }
  int cols() const { return truth_.cols(); }
  std::uint64_t pulls() const { return pulls_; }
  double pseudo_regret() const { return pseudo_regret_; }
  /// Stream shared by the noise and by policies choosing entries.
  Rng& rng() { return rng_; }
  /// pulls * M_max minus the observed rewards.
  double noisy_regret() const;

  /// When on, the cumulative pseudo-regret after every pull is appended.
  void record_trajectory(bool on) { recording_ = on; }
  const std::vector<double>& trajectory() const { return trajectory_; }
  /// Clears pull counts, regret and trajectory; the noise stream continues.
  void reset_accounting();

 private:
  LowRankMatrix truth_;
  NoiseSpec noise_;
  Rng rng_;
  GapStats gaps_;
  double scale_ = 0.0;
  std::uint64_t pulls_ = 0;
  double pseudo_regret_ = 0.0;
  double reward_sum_ = 0.0;
  bool recording_ = false;
  std::vector<double> trajectory_;
};

struct SmeAeEpoch {
  int l = 0;
  double delta_l = 0.0;
  std::uint64_t T_l = 0;
  std::size_t active_before = 0;
  std::size_t active_after = 0;
  double m_hat_max = 0.0;
  std::pair<int, int> m_hat_argmax{0, 0};
  /// ||M_hat - M||_inf
  double estimate_error = 0.0;
  /// max over the active set of |Delta_hat - Delta| <= 2^{-(l+2)}
  bool good_event = false;
  /// A_{l+1} was empty and fell back to the argmax over A_l.
  bool fallback = false;
  /// A_{l+1} (A_l itself for a truncated epoch), in row-major order.
  std::vector<std::pair<int, int>> active;
};

struct SmeAeTrace {
  std::vector<SmeAeEpoch> epochs;
  std::uint64_t tau = 0;
  std::pair<int, int> recommendation{0, 0};
  bool truncated = false;
  bool correct = false;
};

/// Successive elimination on spectral estimates. Each epoch draws T_l entries
/// uniformly from the full grid, estimates M with rank r, and keeps the active
/// entries whose estimated gap to the global estimated maximum is at most
/// 2^{-(l+2)}. Stops with one active entry or when max_budget pulls are spent;
/// a truncated last epoch uses the remaining budget and recommends the argmax
/// of its estimate over the active set. Throws InvariantError if the best
/// entry is pruned while the good event holds.
SmeAeTrace sme_ae(BanditEnv& env, double delta, double C, int r, std::uint64_t max_budget);

namespace policy {
/// SME-AE followed by commitment; delta = 0 means 1 / T^2.
struct SmeAeCommit {
  double delta = 0.0;
  double C = 0.01;
  int r = 1;
};
/// Uniform exploration for explore_T rounds, then commitment to the argmax of
/// the rank-r estimate; explore_T = 0 means T^{2/3} (n+m)^{1/3}.
struct Etc {
  std::uint64_t explore_T = 0;
  int r = 1;
};
struct UniformRandom {};
struct FixedEntry {
  int i = 0;
  int j = 0;
};
}  // namespace policy

using Policy =
    std::variant<policy::SmeAeCommit, policy::Etc, policy::UniformRandom, policy::FixedEntry>;

struct RegretTrace {
  /// Cumulative pseudo-regret after each round (length T).
  std::vector<double> cumulative;
  double pseudo_regret = 0.0;
  double noisy_regret = 0.0;
  /// Exploration length (SME-AE stopping time or ETC exploration rounds).
  std::uint64_t tau = 0;
  std::optional<std::pair<int, int>> commitment;
  bool correct = false;
  std::optional<SmeAeTrace> sme_ae;
};

/// Runs `policy` for T rounds on a fresh environment state.
RegretTrace run_regret(BanditEnv& env, const Policy& policy, std::uint64_t T);

/// psi = c (m+n) ln(e/D) / D^2 * ln^3(e (m+n) ln(e/D) / (D delta)), D = delta_min.
double psi_bound(int m, int n, double delta, double delta_min, double c);

struct RegretBound {
  double gap_dependent = 0.0;
  double gap_independent = 0.0;
  double zeta = 0.0;
  /// Gap level attaining the gap-independent supremum on the search grid.
  double worst_gap = 0.0;
};

/// Gap-dependent: Delta_bar (psi(1/T^2) + 1) + Delta_max / T. Gap-independent:
/// sup over D in (0, 1] of min(zeta c (m+n) ln(e/D)/D ln^3(e (m+n) ln(e/D) T^2 / D)
/// + zeta D / T, zeta D T), with zeta = Delta_max / Delta_min, on a log grid.
RegretBound regret_bound(int m, int n, double T, const GapStats& stats, double c);

}  // namespace lowrank
