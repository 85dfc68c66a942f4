#include <doctest.h>

#include <cmath>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/rng.hpp"

using namespace lowrank;

TEST_CASE("same seed gives the same stream") {
  Rng a(42);
  Rng b(42);
  for (int k = 0; k < 1000; ++k) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  Rng d(42);
  int equal = 0;
  for (int k = 0; k < 100; ++k) equal += c.next_u64() == d.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("derive_seed follows the mixing rule") {
  CHECK(derive_seed(7, 3, 5) == (7 ^ mix64(mix64(3 + 0x9E3779B97F4A7C15ULL) + 5)));
  CHECK(derive_seed(7, 3, 5) != derive_seed(7, 5, 3));
  CHECK(derive_seed(7, 0, 1) != derive_seed(7, 1, 0));
}

TEST_CASE("splitmix64 reference outputs") {
  // Published first outputs of SplitMix64 seeded with 0.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("uniform draws stay in range") {
  Rng rng(1);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double w = rng.uniform(-2.0, 3.0);
    CHECK(w >= -2.0);
    CHECK(w < 3.0);
    CHECK(rng.uniform_index(7) < 7);
    const double s = rng.rademacher();
    CHECK((s == 1.0 || s == -1.0));
    CHECK(rng.exponential() >= 0.0);
  }
  CHECK_THROWS_AS(rng.uniform_index(0), ParameterError);
}

TEST_CASE("uniform_index is balanced") {
  Rng rng(2);
  constexpr int kDraws = 100000;
  std::vector<int> counts(5, 0);
  for (int k = 0; k < kDraws; ++k) ++counts[rng.uniform_index(5)];
  const double expected = kDraws / 5.0;
  const double sd = std::sqrt(kDraws * 0.2 * 0.8);
  for (int c : counts) CHECK(std::abs(c - expected) < 4.0 * sd);
}

TEST_CASE("dirichlet_flat lies on the simplex") {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto x = rng.dirichlet_flat(6);
    REQUIRE(x.size() == 6);
    double total = 0.0;
    for (double v : x) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("categorical sampler respects weights") {
  const std::vector<double> w{0.0, 1.0, 3.0};
  const CategoricalSampler s(w);
  Rng rng(4);
  std::vector<int> counts(3, 0);
  constexpr int kDraws = 40000;
  for (int k = 0; k < kDraws; ++k) ++counts[s.sample(rng)];
  CHECK(counts[0] == 0);
  CHECK(std::abs(counts[2] / static_cast<double>(kDraws) - 0.75) < 0.01);
  CHECK_THROWS_AS(CategoricalSampler(std::vector<double>{}), InputError);
  CHECK_THROWS_AS(CategoricalSampler(std::vector<double>{-1.0, 2.0}), InputError);
  CHECK_THROWS_AS(CategoricalSampler(std::vector<double>{0.0, 0.0}), InputError);
}
