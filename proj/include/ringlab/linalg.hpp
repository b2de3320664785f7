#pragma once

#include <Eigen/Dense>

#include "ringlab/error.hpp"

namespace ringlab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Op { None, Adjoint };

/// C = op(A) * op(B) through BLAS.
CMatrix multiply(const CMatrix& A, Op opA, const CMatrix& B, Op opB);

struct Svd {
  CMatrix U;          ///< left singular vectors (columns)
  Eigen::VectorXd s;  ///< descending
  CMatrix V;          ///< right singular vectors, M = U diag(s) V*
};

/// Dense SVD of a square matrix (zgesvd). Without vectors, U and V are left empty.
Svd svd(const CMatrix& M, bool vectors);

Eigen::VectorXd singular_values(const CMatrix& M);

/// LU-based inverse.
CMatrix inverse(const CMatrix& M);

CVector eigenvalues(const CMatrix& M);

/// Eigenvalues of a real symmetric matrix, ascending (dsyev).
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& M);

/// Largest singular value.
double operator_norm(const CMatrix& M);

/// Unitary factor Q of M = QR with the phases of diag(R) moved into Q, so
/// that Q is Haar when M has i.i.d. complex Gaussian entries.
CMatrix qr_unitary(const CMatrix& M);

/// ||U* U - I|| in operator norm.
double unitarity_defect(const CMatrix& U);

}  // namespace ringlab
