#include "lowrank/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

constexpr int kMaxSweeps = 100;

// Replaces the flagged columns of q with unit vectors orthogonal to every
// other column, using Gram-Schmidt over the standard basis.
void complete_orthonormal(Matrix& q, const std::vector<bool>& missing) {
  const Eigen::Index rows = q.rows();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (!missing[static_cast<std::size_t>(j)]) kept.push_back(j);

  Eigen::Index next_basis = 0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (!missing[static_cast<std::size_t>(j)]) continue;
    while (next_basis < rows) {
      Vector v = Vector::Unit(rows, next_basis++);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index k : kept) v -= q.col(k).dot(v) * q.col(k);
      const double len = v.norm();
      if (len > 0.5) {
        q.col(j) = v / len;
        kept.push_back(j);
        break;
      }
    }
  }
}

// One-sided (Hestenes) Jacobi on a matrix with rows >= cols.
SvdFactors jacobi_tall(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::Identity(n, n);
  const double tol = static_cast<double>(m) * std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms(j) = w.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

  SvdFactors out{Matrix(m, n), Vector(n), Matrix(n, n)};
  const double top = norms(order.front());
  // Below this the direction of w_j is dominated by rounding.
  const double floor = top * 1e3 * std::numeric_limits<double>::epsilon();
  std::vector<bool> missing(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.sigma(k) = norms(j);
    out.V.col(k) = v.col(j);
    if (norms(j) > floor && norms(j) > 0.0) {
      out.U.col(k) = w.col(j) / norms(j);
    } else {
      out.U.col(k).setZero();
      missing[static_cast<std::size_t>(k)] = true;
    }
  }
  if (std::any_of(missing.begin(), missing.end(), [](bool b) { return b; }))
    complete_orthonormal(out.U, missing);
  return out;
}

void fix_signs(SvdFactors& f) {
  for (Eigen::Index k = 0; k < f.U.cols(); ++k) {
    for (Eigen::Index i = 0; i < f.U.rows(); ++i) {
      const double x = f.U(i, k);
      if (std::abs(x) > 1e-12) {
        if (x < 0.0) {
          f.U.col(k) *= -1.0;
          f.V.col(k) *= -1.0;
        }
        break;
      }
    }
  }
}

}  // namespace

void require_finite(const Matrix& a, std::string_view what) {
  if (a.size() == 0) throw InputError(std::string(what) + ": empty matrix");
  if (!a.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

SvdFactors thin_svd(const Matrix& a) {
  require_finite(a, "thin_svd");
  SvdFactors f;
  if (a.rows() >= a.cols()) {
    f = jacobi_tall(a);
  } else {
    SvdFactors t = jacobi_tall(a.transpose());
    f = SvdFactors{std::move(t.V), std::move(t.sigma), std::move(t.U)};
  }
  fix_signs(f);
  return f;
}

SvdFactors svd(const Matrix& a, int r) {
  const auto k = std::min(a.rows(), a.cols());
  if (r < 1 || r > k)
    throw ParameterError("svd: rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(k) + "]");
  SvdFactors full = thin_svd(a);
  if (r == k) return full;
  return SvdFactors{full.U.leftCols(r), full.sigma.head(r), full.V.leftCols(r)};
}

Matrix best_rank_r(const Matrix& a, int r) {
  const auto k = std::min(a.rows(), a.cols());
  if (r < 1 || r > k)
    throw ParameterError("best_rank_r: rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(k) + "]");
  require_finite(a, "best_rank_r");
  if (r == k) return a;
  return svd(a, r).reconstruct();
}

Matrix matrix_sign(const Matrix& a) {
  require_finite(a, "matrix_sign");
  if (a.cwiseAbs().maxCoeff() == 0.0) throw SingularInputError("matrix_sign: zero matrix");
  const SvdFactors f = thin_svd(a);
  return f.U * f.V.transpose();
}

double norm(const Matrix& a, NormKind kind) {
  require_finite(a, "norm");
  switch (kind) {
    case NormKind::Spectral:
      return thin_svd(a).sigma(0);
    case NormKind::OneToInf:
      return a.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::TwoToInf:
      return a.rowwise().norm().maxCoeff();
    case NormKind::EntryMax:
      return a.cwiseAbs().maxCoeff();
    case NormKind::Frobenius:
      return a.norm();
  }
  throw ParameterError("norm: unknown kind");
}

double subspace_error(const Matrix& u, const Matrix& u_hat, Alignment alignment) {
  if (u.rows() != u_hat.rows() || u.cols() != u_hat.cols())
    throw ShapeError("subspace_error: U and Uhat differ in shape");
  require_finite(u, "subspace_error");
  require_finite(u_hat, "subspace_error");
  const Matrix h = u_hat.transpose() * u;
  Matrix rotation;
  if (alignment == Alignment::RawProjection) {
    rotation = h;
  } else {
    // sgn(H); for H = 0 every orthogonal matrix is equally bad, thin_svd picks one.
    const SvdFactors f = thin_svd(h);
    rotation = f.U * f.V.transpose();
  }
  return (u - u_hat * rotation).rowwise().norm().maxCoeff();
}

Matrix symmetric_dilation(const Matrix& m) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  Matrix s = Matrix::Zero(rows + cols, rows + cols);
  s.topRightCorner(rows, cols) = m;
  s.bottomLeftCorner(cols, rows) = m.transpose();
  return s;
}

}  // namespace lowrank
