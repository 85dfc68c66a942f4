#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "lowrank/config.hpp"
#include "lowrank/data_gen.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/estimators.hpp"

using namespace lowrank;

namespace {

ObservationBatch reward_batch(int m, int n, std::vector<RewardSample> s) {
  ObservationBatch b;
  b.model = ObservationModel::Reward;
  b.m = m;
  b.n = n;
  b.rewards = std::move(s);
  return b;
}

ObservationBatch pair_batch(int n, std::vector<std::pair<int, int>> pairs) {
  ObservationBatch b;
  b.model = ObservationModel::TransitionPairs;
  b.m = n;
  b.n = n;
  b.pairs = std::move(pairs);
  return b;
}

ObservationBatch trajectory_batch(int n, std::vector<int> states) {
  ObservationBatch b;
  b.model = ObservationModel::Trajectory;
  b.m = n;
  b.n = n;
  b.states = std::move(states);
  return b;
}

void check_stochastic(const Matrix& p) {
  CHECK(p.minCoeff() >= 0.0);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    CHECK(std::abs(p.row(i).sum() - 1.0) < kTolerances.stochastic_rows);
}

}  // namespace

TEST_CASE("single reward observation") {
  const ObservationBatch b = reward_batch(2, 2, {{0, 0, 5.0}});
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 20.0;
  CHECK(empirical_reward_matrix(b) == expected);
  CHECK((estimate_reward(b, 1) - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(estimate_reward(reward_batch(2, 2, {}), 1), InputError);
}

TEST_CASE("noiseless full coverage recovers the matrix") {
  Rng rng(1);
  const Matrix m = gen::rank_r_matrix(5, 6, 2, rng);
  std::vector<RewardSample> s;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 6; ++j) s.push_back({i, j, m(i, j)});
  CHECK((estimate_reward(reward_batch(5, 6, s), 2) - m).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((estimate_reward(reward_batch(5, 6, s), 3) - m).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("reward estimate is linear in the observations") {
  Rng rng(2);
  std::vector<RewardSample> s;
  for (int t = 0; t < 50; ++t)
    s.push_back({static_cast<int>(rng.uniform_index(4)), static_cast<int>(rng.uniform_index(3)),
                 rng.uniform(-1, 1)});
  std::vector<RewardSample> doubled = s;
  for (RewardSample& x : doubled) x.y *= 2.0;
  const Matrix a = empirical_reward_matrix(reward_batch(4, 3, s));
  const Matrix b = empirical_reward_matrix(reward_batch(4, 3, doubled));
  CHECK((b - 2.0 * a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("count_pairs examples") {
  Matrix expected(2, 2);
  expected << 0, 0.5, 0.5, 0;
  CHECK(count_pairs(pair_batch(2, {{0, 1}, {1, 0}}), 2) == expected);
  CHECK(count_pairs(trajectory_batch(2, {0, 1, 0}), 2) == expected);
  CHECK_THROWS_AS(count_pairs(pair_batch(2, {{0, 2}}), 2), InputError);
}

TEST_CASE("pair counts from a rank-one chain sit inside CLT bands") {
  Rng rng(3);
  const MarkovChain c = make_low_rank_chain(4, 1, rng);
  constexpr std::size_t kPairs = 1000000;
  const std::vector<double> nu(c.nu.data(), c.nu.data() + c.nu.size());
  const Matrix freq = count_pairs(sample_generative(c, nu, 2 * kPairs, rng), 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(freq(i, j) - c.M(i, j)) <= 5.0 * std::sqrt(c.M(i, j) / kPairs));
}

TEST_CASE("normalize_rows examples") {
  Matrix a(3, 3);
  a << 0.2, -0.1, 0.3, -1, -2, 0, 0.1, 0.3, 0.6;
  const Matrix p = normalize_rows(a);
  CHECK(p(0, 0) == doctest::Approx(0.4));
  CHECK(p(0, 1) == 0.0);
  CHECK(p(0, 2) == doctest::Approx(0.6));
  for (int j = 0; j < 3; ++j) CHECK(p(1, j) == doctest::Approx(1.0 / 3.0));
  CHECK((p.row(2) - a.row(2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(normalize_rows(Matrix::Ones(2, 3)), ShapeError);
}

TEST_CASE("generative estimator fixed points") {
  Rng rng(4);
  const MarkovChain c = make_low_rank_chain(6, 2, rng);
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.25, 0.75;
  const MarkovChain exact = chain_from_transition(p);
  // nu = (1/3, 2/3); M = [[1/6, 1/6], [1/6, 1/2]] over 6 pairs.
  const ObservationBatch b = pair_batch(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 1}, {1, 1}});
  const FrequencyEstimate e = estimate_generative(b, 2);
  CHECK((e.M_hat - exact.M).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((e.P_hat - exact.P).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((e.M_hat - e.M_tilde).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::isinf(e.spectral_gap));
  CHECK(e.T == 12);
  check_stochastic(e.P_hat);

  const std::vector<double> nu0(6, 1.0 / 6);
  const FrequencyEstimate full = estimate_generative(sample_generative(c, nu0, 2000, rng), 6);
  CHECK((full.M_hat - full.M_tilde).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward estimator with tau = 1 equals the generative estimator on consecutive pairs") {
  Rng rng(5);
  const MarkovChain c = make_low_rank_chain(5, 2, rng);
  const ObservationBatch t = sample_trajectory(c, std::vector<double>(5, 0.2), 3001, rng);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t k = 0; k + 1 < t.states.size(); ++k) pairs.emplace_back(t.states[k], t.states[k + 1]);
  const ObservationBatch pb = pair_batch(5, pairs);
  CHECK(count_pairs(t, 5) == count_pairs(pb, 5));
  const FrequencyEstimate fwd = estimate_forward(t, 2, 1);
  const FrequencyEstimate gen = estimate_generative(pb, 2);
  CHECK(fwd.M_tilde == gen.M_tilde);
  CHECK((fwd.M_hat - gen.M_hat).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((fwd.P_hat - gen.P_hat).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("forward estimator on an i.i.d. chain recovers nu in every row") {
  Rng rng(6);
  const MarkovChain c = make_low_rank_chain(6, 1, rng);
  const ObservationBatch t = sample_trajectory(c, std::vector<double>(6, 1.0 / 6), 100000, rng);
  const FrequencyEstimate e = estimate_forward(t, 1, 4);
  CHECK(e.tau == 4);
  check_stochastic(e.P_hat);
  for (int i = 0; i < 6; ++i) CHECK((e.P_hat.row(i) - c.nu.transpose()).cwiseAbs().sum() < 0.02);
}

TEST_CASE("forward subsets partition the usable transitions of a cycle") {
  Matrix cycle(4, 4);
  cycle << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0;
  const MarkovChain det = chain_from_transition(cycle, ChainOptions{.compute_mixing = false});
  Rng rng(7);
  for (const std::size_t T : {20UL, 23UL, 37UL}) {
    const ObservationBatch t = sample_trajectory(det, std::vector<double>{1, 0, 0, 0}, T, rng);
    for (const int tau : {1, 2, 3, 5}) {
      if (T < 2 * static_cast<std::size_t>(tau)) continue;
      const std::size_t strides = T / tau;
      std::size_t total = 0;
      std::vector<int> used(T, 0);
      for (int k = 0; k < tau; ++k) {
        std::size_t count = 0;
        for (std::size_t l = 0; l < strides; ++l) {
          const std::size_t s = k + l * tau;
          if (s + 1 >= T) break;
          ++used[s];
          ++count;
        }
        const FrequencyEstimate part = estimate_forward_subset(t, 1, tau, k);
        CHECK(std::abs(part.M_tilde.sum() - 1.0) < 1e-12);
        CHECK(count > 0);
        total += count;
      }
      for (std::size_t s = 0; s < T; ++s) CHECK(used[s] <= 1);
      CHECK(total == std::min(tau * strides, T - 1));
    }
  }
}

TEST_CASE("forward estimator preconditions") {
  const ObservationBatch t = trajectory_batch(2, {0, 1, 0, 1, 0});
  CHECK_THROWS_AS(estimate_forward(t, 1, 0), ParameterError);
  CHECK_THROWS_AS(estimate_forward(t, 1, 3), ParameterError);
  CHECK_THROWS_AS(estimate_forward(t, 3, 1), ParameterError);
  CHECK_THROWS_AS(estimate_forward(pair_batch(2, {{0, 1}}), 1, 1), InputError);
}

TEST_CASE("choose_tau examples") {
  CHECK(choose_tau(1, std::exp(1.0), 1.0) == 2);
  CHECK(choose_tau(3, 100, 0.1) == 42);
  CHECK(choose_tau(1, 1e6, 1.0 / 20) == 34);
  CHECK_THROWS_AS(choose_tau(0, 10, 0.5), ParameterError);
  CHECK_THROWS_AS(choose_tau(1, 10, 0.0), ParameterError);
}

TEST_CASE("property: normalize_rows output is stochastic for any finite input") {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = gen::dim(rng, 1, 8);
    Matrix a = gen::uniform_matrix(n, n, rng, -2.0, 1.0);
    if (trial % 5 == 0) a.row(0).setConstant(-1.0);
    check_stochastic(normalize_rows(a));
  }
}

TEST_CASE("property: aggregated forward estimates are stochastic") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen::dim(rng, 2, 8);
    const int r = gen::dim(rng, 1, std::min(n, 3));
    const MarkovChain c = make_low_rank_chain(n, r, rng);
    const ObservationBatch t =
        sample_trajectory(c, std::vector<double>(static_cast<std::size_t>(n), 1.0 / n), 2000, rng);
    const FrequencyEstimate e = estimate_forward(t, r, gen::dim(rng, 1, 6));
    check_stochastic(e.P_hat);
  }
}
