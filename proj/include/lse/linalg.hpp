#pragma once

#include "lse/core.hpp"

namespace lse {

/// Eigen-pairs of a Hermitian matrix, eigenvalues ascending.
struct HermitianEigen {
  VectorXd values;
  MatrixXcd vectors;
};

/// Dense Hermitian eigensolver (LAPACK zheevd); only the lower triangle is read.
/// Throws SolverError if LAPACK reports failure.
HermitianEigen eigh(const MatrixXcd& H);

/// Eigen-pairs with eigenvalue in (lower, +inf), via LAPACK zheevr.
HermitianEigen eigh_above(const MatrixXcd& H, double lower);

/// Eigenvalues only, ascending.
VectorXd eigvalsh(const MatrixXcd& H);

/// Largest deviation from Hermitian symmetry, relative to the largest entry.
double hermitian_defect(const MatrixXcd& H);

/// Roots of c[0] z^n + c[1] z^(n-1) + ... + c[n] via the companion matrix.
/// Leading coefficient must be nonzero.
std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs);

/// Lawson-Hanson nonnegative least squares: argmin ||A x - b|| s.t. x >= 0.
VectorXd nnls(const MatrixXd& A, const VectorXd& b, int max_iter = 0);

}  // namespace lse
