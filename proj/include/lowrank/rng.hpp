#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace lowrank {

/// SplitMix64 step; advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless 64-bit finalizer (the SplitMix64 output function).
std::uint64_t mix64(std::uint64_t x);

/// Seed for task (a, b) under a base seed: base ^ mix64(mix64(a + golden) + b), golden = 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

/// xoshiro256** seeded through SplitMix64. All distributions are implemented
/// here so sample streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// +1 or -1 with equal probability.
  double rademacher();
  double exponential();
  /// Flat Dirichlet(1, ..., 1) vector of dimension k.
  std::vector<double> dirichlet_flat(std::size_t k);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

/// Inverse-CDF sampler over a finite set of nonnegative weights.
class CategoricalSampler {
 public:
  CategoricalSampler() = default;
  explicit CategoricalSampler(std::span<const double> weights);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace lowrank
