#pragma once

#include <cstdint>

#include "lowrank/linalg.hpp"
#include "lowrank/rng.hpp"

// Hand-rolled generators for the property tests.
namespace gen {

inline lowrank::Matrix uniform_matrix(int m, int n, lowrank::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  lowrank::Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(lo, hi);
  return a;
}

inline lowrank::Matrix rank_r_matrix(int m, int n, int r, lowrank::Rng& rng) {
  return uniform_matrix(m, r, rng) * uniform_matrix(r, n, rng);
}

inline int dim(lowrank::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Orthogonal matrix from the Q factor of a random square matrix.
inline lowrank::Matrix orthogonal(int r, lowrank::Rng& rng) {
  const lowrank::Matrix a = uniform_matrix(r, r, rng);
  return a.householderQr().householderQ() * lowrank::Matrix::Identity(r, r);
}

inline lowrank::Matrix stochastic(int n, lowrank::Rng& rng) {
  lowrank::Matrix p(n, n);
  for (int i = 0; i < n; ++i) {
    const auto row = rng.dirichlet_flat(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) p(i, j) = row[static_cast<std::size_t>(j)];
  }
  return p;
}

}  // namespace gen
