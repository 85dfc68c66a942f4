#include "lowrank/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "lowrank/errors.hpp"

namespace lowrank {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return base ^ mix64(mix64(a + 0x9E3779B97F4A7C15ULL) + b);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw ParameterError("uniform_index: n must be positive");
  // Lemire's multiply-shift with rejection of the biased low region.
  unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * n;
  auto low = static_cast<std::uint64_t>(product);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next_u64()) * n;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double Rng::rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

double Rng::exponential() {
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform());
}

std::vector<double> Rng::dirichlet_flat(std::size_t k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) {
    x = exponential();
    total += x;
  }
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(k));
    return w;
  }
  for (auto& x : w) x /= total;
  return w;
}

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
  if (weights.empty()) throw InputError("CategoricalSampler: no weights");
  cumulative_.resize(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw InputError("CategoricalSampler: weights must be finite and nonnegative");
    total += weights[i];
    cumulative_[i] = total;
  }
  if (total <= 0.0) throw InputError("CategoricalSampler: weights sum to zero");
}

std::size_t CategoricalSampler::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  // upper_bound never lands on a zero-mass slot: its cumulative equals its predecessor's.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    // Rounding pushed u to the total; fall back to the last slot with mass.
    --it;
    while (it != cumulative_.begin() && *(it - 1) == *it) --it;
  }
  return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace lowrank
