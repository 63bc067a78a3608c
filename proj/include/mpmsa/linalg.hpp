#pragma once

#include <Eigen/Dense>
#include <type_traits>

namespace mpmsa {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {
// LAPACK divide-and-conquer (dsyevd) and MRRR subset (dsyevr) paths.
void lapack_eigensolve(const Eigen::MatrixXd& A, Eigen::VectorXd& w, Eigen::MatrixXd& V);
void lapack_eigensolve_lowest(const Eigen::MatrixXd& A, int count, Eigen::VectorXd& w, Eigen::MatrixXd& V);
}  // namespace detail

// Some OpenBLAS builds pick AVX-512 kernels that return wrong eigenvectors on
// newer Xeons. Call first thing in main: if a small dsyevd residual check
// fails and OPENBLAS_CORETYPE is unset, the process re-executes itself with
// a safe core type. Throws if the check still fails.
void ensure_sane_lapack(char** argv);

// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
template <typename Scalar>
void symmetric_eigensolve(const MatrixX<Scalar>& A, VectorX<Scalar>& w, MatrixX<Scalar>& V) {
  if constexpr (std::is_same_v<Scalar, double>) {
    detail::lapack_eigensolve(A, w, V);
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(A);
    w = es.eigenvalues();
    V = es.eigenvectors();
  }
}

template <typename Scalar>
void symmetric_eigensolve_lowest(const MatrixX<Scalar>& A, int count, VectorX<Scalar>& w, MatrixX<Scalar>& V) {
  if constexpr (std::is_same_v<Scalar, double>) {
    detail::lapack_eigensolve_lowest(A, count, w, V);
  } else {
    symmetric_eigensolve<Scalar>(A, w, V);
    w = w.head(count).eval();
    V = V.leftCols(count).eval();
  }
}

// Largest singular value of a small dense block.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& B) {
  using S = typename Derived::Scalar;
  if (B.rows() == 0 || B.cols() == 0) return S(0);
  if (B.rows() == 1 || B.cols() == 1) return B.norm();
  Eigen::JacobiSVD<MatrixX<S>> svd(B.eval());
  return svd.singularValues()(0);
}

}  // namespace mpmsa
