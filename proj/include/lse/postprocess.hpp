#pragma once

#include <optional>
#include <string>

#include "lse/toeplitz.hpp"

namespace lse {

struct CovarianceEstimate {
  /// Gamma T(u) Gamma^T on the observed samples.
  MatrixXcd matrix;
  /// Descending.
  std::vector<double> eigenvalues;
  /// gls | grid | external
  std::string source = "external";
  /// The full-index T(u) the matrix was cut from; MUSIC works on it directly.
  ToeplitzParam full;
};

/// Rows/columns of T(u) indexed by Omega. Throws DomainError when T(u) has an eigenvalue
/// below -psd_tol * lambda_max.
CovarianceEstimate clean_covariance(const ToeplitzParam& u, const SampleSet& omega,
                                    std::string source = "external", double psd_tol = 1e-6);

struct SorteResult {
  int K = 0;
  /// All gap variances vanish: there is no cluster structure.
  bool degenerate = false;
  /// SORTE(k) for k = 1..n-3 (index k-1); +inf where var_k = 0.
  std::vector<double> statistic;
};

/// Gap-variance-ratio order selection on a descending eigenvalue list (n >= 4).
SorteResult sorte(const std::vector<double>& eigenvalues);

/// Root-MUSIC on the full T(u) carried by `cov`. Requires 1 <= K < M.
std::vector<double> music(const CovarianceEstimate& cov, int K);

/// Root-MUSIC on T(u) directly.
std::vector<double> root_music(const ToeplitzParam& u, int K);

struct AmplitudeFit {
  VectorXcd amps;
  bool rank_deficient = false;
  std::string warning;
};

/// Least-squares y_Omega ~ A_Omega(f) s; minimum-norm when A_Omega(f) loses column rank.
AmplitudeFit refit_amplitudes(const Observation& obs, const std::vector<double>& freqs);

struct FrameworkOptions {
  /// Use this order in MUSIC instead of the SORTE estimate.
  std::optional<int> oracle_order;
  /// Feed SORTE with the eigenvalues of the min-eigenvalue-shifted T(u).
  bool shift_before_sorte = false;
  double psd_tol = 1e-6;
};

struct FrameworkResult {
  int K_sorte = 0;
  bool sorte_degenerate = false;
  int K_used = 0;
  std::vector<double> freqs;
  VectorXcd amps;
  bool rank_deficient = false;
  std::vector<double> eigenvalues;
};

/// Covariance -> SORTE -> root-MUSIC -> amplitude refit.
FrameworkResult run_framework(const ToeplitzParam& u, const Observation& obs,
                              const std::string& source, const FrameworkOptions& opts = {});

}  // namespace lse
