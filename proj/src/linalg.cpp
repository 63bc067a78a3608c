#include "mpmsa/linalg.hpp"

#include <lapacke.h>

#include <unistd.h>

#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

extern "C" void openblas_set_num_threads(int);

namespace mpmsa::detail {

namespace {

// Trials are parallelised by the caller; keep BLAS itself sequential so
// results do not depend on the thread count.
void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

}  // namespace

void lapack_eigensolve(const Eigen::MatrixXd& A, Eigen::VectorXd& w, Eigen::MatrixXd& V) {
  pin_blas_threads();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  V = A;
  w.resize(n);
  if (n == 0) return;
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, V.data(), n, w.data());
  if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
}

void lapack_eigensolve_lowest(const Eigen::MatrixXd& A, int count, Eigen::VectorXd& w, Eigen::MatrixXd& V) {
  pin_blas_threads();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (count < 1 || count > n) throw std::invalid_argument("eigenvalue count out of range");
  Eigen::MatrixXd work = A;
  Eigen::VectorXd all(n);
  V.resize(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0, 1, count, 0.0,
                                   &found, all.data(), V.data(), n, support.data());
  if (info != 0 || found != count) throw std::runtime_error("dsyevr failed, info=" + std::to_string(info));
  w = all.head(count);
}

}  // namespace mpmsa::detail

namespace mpmsa {

void ensure_sane_lapack(char** argv) {
  const int n = 96;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = std::cos(0.37 * (i + 1) * (j + 1)) + (i == j ? 0.01 * i : 0.0);
  A = (A + A.transpose()).eval();
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  detail::lapack_eigensolve(A, w, V);
  const double residual = (A * V - V * w.asDiagonal()).norm() / A.norm();
  if (residual < 1e-10) return;
  if (!std::getenv("OPENBLAS_CORETYPE")) {
    setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    execv("/proc/self/exe", argv);
  }
  throw std::runtime_error("LAPACK eigensolver self-check failed (relative residual " + std::to_string(residual) +
                           "); try another OPENBLAS_CORETYPE");
}

}  // namespace mpmsa
