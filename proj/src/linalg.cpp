#include "lse/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lse {

namespace {

HermitianEigen run_zheevd(const MatrixXcd& H, char jobz) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  if (H.cols() != n) throw InvalidArgument("eigh: matrix must be square");
  HermitianEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  MatrixXcd work = H;
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'L', n,
                     reinterpret_cast<lapack_complex_double*>(work.data()), n, out.values.data());
  if (info != 0) throw SolverError("eigh: zheevd failed with info=" + std::to_string(info));
  if (!out.values.allFinite()) throw SolverError("eigh: non-finite eigenvalues");
  if (jobz == 'V') out.vectors = std::move(work);
  return out;
}

}  // namespace

HermitianEigen eigh(const MatrixXcd& H) { return run_zheevd(H, 'V'); }

HermitianEigen eigh_above(const MatrixXcd& H, double lower) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  if (H.cols() != n) throw InvalidArgument("eigh_above: matrix must be square");
  HermitianEigen out;
  if (n == 0) return out;
  MatrixXcd work = H;
  VectorXd w(n);
  MatrixXcd Z(n, n);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int m = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'V', 'L', n, reinterpret_cast<lapack_complex_double*>(work.data()), n,
      lower, std::numeric_limits<double>::max(), 0, 0, 0.0, &m, w.data(),
      reinterpret_cast<lapack_complex_double*>(Z.data()), n, isuppz.data());
  if (info != 0) throw SolverError("eigh_above: zheevr failed with info=" + std::to_string(info));
  out.values = w.head(m);
  if (!out.values.allFinite()) throw SolverError("eigh_above: non-finite eigenvalues");
  out.vectors = Z.leftCols(m);
  return out;
}

VectorXd eigvalsh(const MatrixXcd& H) { return run_zheevd(H, 'N').values; }

double hermitian_defect(const MatrixXcd& H) {
  const double scale = std::max(H.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (H - H.adjoint()).cwiseAbs().maxCoeff() / scale;
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs) {
  if (coeffs.empty() || coeffs.front() == cplx(0.0))
    throw InvalidArgument("polynomial_roots: leading coefficient must be nonzero");
  const int n = static_cast<int>(coeffs.size()) - 1;
  if (n == 0) return {};
  MatrixXcd C = MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) C(0, k) = -coeffs[k + 1] / coeffs[0];
  for (int k = 1; k < n; ++k) C(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<MatrixXcd> es(C, false);
  if (es.info() != Eigen::Success) throw SolverError("polynomial_roots: eigen solver failed");
  return {es.eigenvalues().begin(), es.eigenvalues().end()};
}

VectorXd nnls(const MatrixXd& A, const VectorXd& b, int max_iter) {
  const Eigen::Index n = A.cols();
  if (A.rows() != b.size()) throw InvalidArgument("nnls: dimension mismatch");
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);
  VectorXd x = VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 10 * std::numeric_limits<double>::epsilon() * A.norm() *
                     std::max<Eigen::Index>(A.rows(), n);

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    VectorXd z = VectorXd::Zero(n);
    if (idx.empty()) return z;
    MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
    VectorXd zp = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[k];
    return z;
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      VectorXd z = solve_passive();
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = 0;
        }
    }
  }
  return x;
}

}  // namespace lse
