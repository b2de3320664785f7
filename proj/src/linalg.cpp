#include "ringlab/linalg.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <mutex>
#include <sstream>
#include <vector>

namespace ringlab {

namespace {

void single_threaded_blas() {
  static std::once_flag flag;
  std::call_once(flag, [] { openblas_set_num_threads(1); });
}

lapack_complex_double* lp(CMatrix& M) {
  return reinterpret_cast<lapack_complex_double*>(M.data());
}

void check_info(lapack_int info, const char* routine, const CMatrix& M) {
  if (info == 0) return;
  std::ostringstream os;
  os << routine << " failed with info = " << info << " on a " << M.rows() << "x" << M.cols()
     << " matrix (max |entry| " << M.cwiseAbs().maxCoeff() << ")";
  fail(ErrorCode::Numeric, os.str());
}

void require_square(const CMatrix& M) {
  require(M.rows() == M.cols() && M.rows() > 0, ErrorCode::InvalidArgument,
          "matrix must be square and non-empty");
}

}  // namespace

CMatrix multiply(const CMatrix& A, Op opA, const CMatrix& B, Op opB) {
  single_threaded_blas();
  const Eigen::Index m = opA == Op::None ? A.rows() : A.cols();
  const Eigen::Index k = opA == Op::None ? A.cols() : A.rows();
  const Eigen::Index kb = opB == Op::None ? B.rows() : B.cols();
  const Eigen::Index n = opB == Op::None ? B.cols() : B.rows();
  require(k == kb, ErrorCode::InvalidArgument, "inner dimensions do not match");
  CMatrix C(m, n);
  if (m == 0 || n == 0) return C;
  if (k == 0) {
    C.setZero();
    return C;
  }
  const cplx one(1.0), zero(0.0);
  cblas_zgemm(CblasColMajor, opA == Op::None ? CblasNoTrans : CblasConjTrans,
              opB == Op::None ? CblasNoTrans : CblasConjTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), &one, A.data(),
              static_cast<int>(A.rows()), B.data(), static_cast<int>(B.rows()), &zero, C.data(),
              static_cast<int>(m));
  return C;
}

Svd svd(const CMatrix& M, bool vectors) {
  single_threaded_blas();
  require_square(M);
  const lapack_int n = static_cast<lapack_int>(M.rows());
  CMatrix work = M;
  Svd out;
  out.s.resize(n);
  std::vector<double> superb(std::max<lapack_int>(1, n - 1));
  if (vectors) {
    out.U.resize(n, n);
    CMatrix VH(n, n);
    const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'A', 'A', n, n, lp(work), n,
                                           out.s.data(), lp(out.U), n, lp(VH), n, superb.data());
    check_info(info, "zgesvd", M);
    out.V = VH.adjoint();
  } else {
    const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', n, n, lp(work), n,
                                           out.s.data(), nullptr, 1, nullptr, 1, superb.data());
    check_info(info, "zgesvd", M);
  }
  return out;
}

CMatrix inverse(const CMatrix& M) {
  single_threaded_blas();
  require_square(M);
  const lapack_int n = static_cast<lapack_int>(M.rows());
  CMatrix work = M;
  std::vector<lapack_int> piv(n);
  check_info(LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lp(work), n, piv.data()), "zgetrf", M);
  check_info(LAPACKE_zgetri(LAPACK_COL_MAJOR, n, lp(work), n, piv.data()), "zgetri", M);
  return work;
}

Eigen::VectorXd singular_values(const CMatrix& M) { return svd(M, false).s; }

CVector eigenvalues(const CMatrix& M) {
  single_threaded_blas();
  require_square(M);
  const lapack_int n = static_cast<lapack_int>(M.rows());
  CMatrix work = M;
  CVector w(n);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, lp(work), n,
                    reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  check_info(info, "zgeev", M);
  return w;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& M) {
  single_threaded_blas();
  require(M.rows() == M.cols(), ErrorCode::InvalidArgument, "matrix must be square");
  const lapack_int n = static_cast<lapack_int>(M.rows());
  Eigen::MatrixXd work = M;
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data());
  require(info == 0, ErrorCode::Numeric, "dsyev failed with info " + std::to_string(info));
  return w;
}

double operator_norm(const CMatrix& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() != M.cols()) {
    const CMatrix G = M.rows() > M.cols() ? multiply(M, Op::Adjoint, M, Op::None)
                                          : multiply(M, Op::None, M, Op::Adjoint);
    return std::sqrt(singular_values(G)(0));
  }
  return singular_values(M)(0);
}

CMatrix qr_unitary(const CMatrix& M) {
  single_threaded_blas();
  require_square(M);
  const lapack_int n = static_cast<lapack_int>(M.rows());
  CMatrix Q = M;
  CVector tau(n);
  auto* t = reinterpret_cast<lapack_complex_double*>(tau.data());
  check_info(LAPACKE_zgeqrf(LAPACK_COL_MAJOR, n, n, lp(Q), n, t), "zgeqrf", M);
  CVector phase(n);
  for (lapack_int j = 0; j < n; ++j) {
    const cplx r = Q(j, j);
    phase(j) = std::abs(r) > 0.0 ? r / std::abs(r) : cplx(1.0);
  }
  check_info(LAPACKE_zungqr(LAPACK_COL_MAJOR, n, n, n, lp(Q), n, t), "zungqr", M);
  for (lapack_int j = 0; j < n; ++j) Q.col(j) *= phase(j);
  return Q;
}

double unitarity_defect(const CMatrix& U) {
  require_square(U);
  CMatrix D = multiply(U, Op::Adjoint, U, Op::None);
  D -= CMatrix::Identity(U.rows(), U.cols());
  return operator_norm(D);
}

}  // namespace ringlab
