#pragma once

#include "lse/core.hpp"

namespace lse {

/// First row u of a Hermitian Toeplitz matrix T(u); u_1 is real.
class ToeplitzParam {
 public:
  ToeplitzParam() = default;
  /// Throws DomainError if |Im(u_1)| exceeds tol * max|u|. The imaginary part is then dropped.
  explicit ToeplitzParam(VectorXcd u, double tol = 1e-10);

  static ToeplitzParam zero(int M) { return ToeplitzParam(VectorXcd::Zero(M)); }
  /// u_m = sum_k p_k exp(-i 2 pi f_k (m-1)), so that T(u) = A(f) diag(p) A(f)^H.
  static ToeplitzParam from_spectrum(const std::vector<double>& freqs,
                                     const std::vector<double>& powers, int M);

  const VectorXcd& values() const { return u_; }
  int size() const { return static_cast<int>(u_.size()); }
  double u1() const { return u_.size() ? u_[0].real() : 0.0; }

 private:
  VectorXcd u_;
};

/// Entry (j,k) = u_{k-j+1} for k >= j, conjugated below the diagonal.
MatrixXcd toeplitz_from_u(const ToeplitzParam& u);

/// Adjoint of T(.) under the real inner product Re tr(A^H B):
/// entry 1 is the trace, entry m >= 2 is (sum of superdiagonal m-1) + conj(sum of subdiagonal m-1).
/// For Hermitian W this equals 2 * (superdiagonal sum). Throws DomainError when W is not
/// Hermitian to within `tol` (relative).
VectorXcd toeplitz_adjoint(const MatrixXcd& W, double tol = 1e-10);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped to zero).
/// The input is symmetrized first. `positive_count`, when given, carries the number of
/// positive eigenvalues from a previous call on a nearby matrix and receives the new count.
MatrixXcd psd_project(const MatrixXcd& H, int* positive_count = nullptr);

struct VandermondeResult {
  std::vector<double> freqs;
  std::vector<double> powers;
  int rank = 0;
  /// ||T(u) - A P A^H||_F
  double residual = 0.0;
  /// Set when the filter system or the power fit is poorly conditioned.
  bool ill_conditioned = false;
};

inline constexpr double kDefaultRankTol = 1e-6;

/// Prony / annihilating-filter Vandermonde decomposition of a rank-deficient PSD Toeplitz
/// matrix. Rank is #{lambda_i > rank_tol * lambda_max}. Throws DomainError when the matrix is
/// numerically full rank (use min_eig_shift first) or clearly indefinite.
VandermondeResult vandermonde_decompose(const ToeplitzParam& u, double rank_tol = kDefaultRankTol);

/// Numerical rank of T(u) with the same relative threshold as vandermonde_decompose.
int toeplitz_rank(const ToeplitzParam& u, double rank_tol = kDefaultRankTol);

struct EigShift {
  ToeplitzParam u;
  double delta = 0.0;
};

/// delta = lambda_min(T(u)); returns u - delta e_1.
EigShift min_eig_shift(const ToeplitzParam& u);

struct SpectrumRetrieval {
  VandermondeResult decomposition;
  double delta = 0.0;
  bool shifted = false;
};

/// Vandermonde decomposition of T(u), preceded by min_eig_shift when T(u) is numerically
/// full rank or indefinite beyond rank_tol.
SpectrumRetrieval retrieve_spectrum(const ToeplitzParam& u, double rank_tol = kDefaultRankTol);

}  // namespace lse
