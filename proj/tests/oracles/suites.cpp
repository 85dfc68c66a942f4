#include "suites.hpp"

#include <algorithm>
#include <cmath>

#include "lowrank/linalg.hpp"
#include "lowrank/rng.hpp"
#include "oracles.hpp"

namespace oracle {

namespace {

Matrix random_matrix(int m, int n, lowrank::Rng& rng) {
  Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  return a;
}

int random_dim(lowrank::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

void record(SuiteResult& s, double error) {
  s.worst = std::max(s.worst, error);
  if (!(error <= s.tolerance)) ++s.failures;
}

}  // namespace

SuiteResult svd_suite(int instances, std::uint64_t seed) {
  SuiteResult s{"full_svd_reference", instances, 0, 0.0, 1e-8};
  lowrank::Rng rng(seed);
  for (int k = 0; k < instances; ++k) {
    const int m = random_dim(rng, 1, 8);
    const int n = random_dim(rng, 1, 8);
    Matrix a = random_matrix(m, n, rng);
    // A quarter of the instances are rank deficient.
    if (k % 4 == 0 && std::min(m, n) > 1) a = random_matrix(m, 1, rng) * random_matrix(1, n, rng);
    const lowrank::SvdFactors mine = lowrank::thin_svd(a);
    const FullSvd ref = full_svd_reference(a);
    double err = 0.0;
    for (Eigen::Index c = 0; c < ref.sigma.size(); ++c) err = std::max(err, std::abs(mine.sigma(c) - ref.sigma(c)));
    const int r = random_dim(rng, 1, std::min(m, n));
    const double tail = std::sqrt(ref.sigma.tail(ref.sigma.size() - r).squaredNorm());
    err = std::max(err, std::abs((a - lowrank::best_rank_r(a, r)).norm() - tail));
    record(s, err);
  }
  return s;
}

SuiteResult norm_suite(int instances, std::uint64_t seed) {
  SuiteResult s{"definitional_norms", instances, 0, 0.0, 1e-10};
  lowrank::Rng rng(seed);
  for (int k = 0; k < instances; ++k) {
    const Matrix a = random_matrix(random_dim(rng, 1, 10), random_dim(rng, 1, 10), rng);
    const Norms ref = definitional_norms(a);
    using lowrank::NormKind;
    const double err = std::max({std::abs(lowrank::norm(a, NormKind::Spectral) - ref.spectral),
                                 std::abs(lowrank::norm(a, NormKind::TwoToInf) - ref.two_to_inf),
                                 std::abs(lowrank::norm(a, NormKind::OneToInf) - ref.one_to_inf),
                                 std::abs(lowrank::norm(a, NormKind::EntryMax) - ref.entry_max),
                                 std::abs(lowrank::norm(a, NormKind::Frobenius) - ref.frobenius)});
    record(s, err);
  }
  return s;
}

SuiteResult alignment_suite(int instances, std::uint64_t seed) {
  SuiteResult s{"exhaustive_subspace_align", instances, 0, 0.0, 1e-12};
  lowrank::Rng rng(seed);
  for (int k = 0; k < instances; ++k) {
    const int m = random_dim(rng, 2, 12);
    Matrix u = random_matrix(m, 1, rng);
    u /= u.norm();
    // Perturbations small enough that the inner-product sign is the minimizing sign.
    const double sign = rng.rademacher();
    Matrix u_hat = sign * u + 0.3 / std::sqrt(static_cast<double>(m)) * random_matrix(m, 1, rng);
    u_hat /= u_hat.norm();
    double err = std::abs(lowrank::subspace_error(u, u_hat, lowrank::Alignment::SignSvd) -
                          exhaustive_subspace_align(u, u_hat));
    // Unrestricted pairs: the aligned error is one of the two enumerated values,
    // hence never below their minimum.
    const Matrix w = random_matrix(m, 1, rng).normalized();
    const double aligned = lowrank::subspace_error(u, w, lowrank::Alignment::SignSvd);
    const double plus = (u - w).cwiseAbs().maxCoeff();
    const double minus = (u + w).cwiseAbs().maxCoeff();
    err = std::max(err, std::min(std::abs(aligned - plus), std::abs(aligned - minus)));
    if (aligned < exhaustive_subspace_align(u, w) - 1e-15) err = INFINITY;
    record(s, err);
  }
  return s;
}

}  // namespace oracle
