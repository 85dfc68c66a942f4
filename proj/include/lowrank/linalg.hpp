#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace lowrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Top singular triplets of a matrix. Columns of U and V are orthonormal and
/// sigma is sorted nonincreasing.
struct SvdFactors {
  Matrix U;
  Vector sigma;
  Matrix V;

  int rank() const { return static_cast<int>(sigma.size()); }
  Matrix reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }
};

enum class NormKind { Spectral, OneToInf, TwoToInf, EntryMax, Frobenius };

/// How the estimated basis is rotated onto the true one before measuring.
///  - SignSvd:       U - Uhat * sgn(Uhat^T U), the Procrustes-optimal rotation.
///  - RawProjection: U - Uhat * (Uhat^T U), the form the error bounds are stated in.
enum class Alignment { SignSvd, RawProjection };

/// Throws InputError if the matrix is empty or has a non-finite entry.
void require_finite(const Matrix& a, std::string_view what);

/// Full thin SVD (min(rows, cols) triplets) by one-sided Jacobi rotations.
/// Singular vectors for zero singular values are completed to an orthonormal
/// set. Each left singular vector has its first nonzero entry made positive.
SvdFactors thin_svd(const Matrix& a);

/// Top-r singular triplets. Requires 1 <= r <= min(rows, cols).
SvdFactors svd(const Matrix& a, int r);

/// Optimal rank-r approximation in Frobenius norm (Eckart-Young).
Matrix best_rank_r(const Matrix& a, int r);

/// U V^T from the thin SVD. Throws SingularInputError for the zero matrix.
Matrix matrix_sign(const Matrix& a);

double norm(const Matrix& a, NormKind kind);

/// ||U - Uhat O||_{2->inf} with O chosen according to `alignment`.
double subspace_error(const Matrix& u, const Matrix& u_hat,
                      Alignment alignment = Alignment::RawProjection);

/// The (m+n) x (m+n) symmetric block matrix [0 M; M^T 0].
Matrix symmetric_dilation(const Matrix& m);

}  // namespace lowrank
