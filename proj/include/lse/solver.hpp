#pragma once

#include <limits>
#include <string>

#include "lse/core.hpp"
#include "lse/prox.hpp"
#include "lse/toeplitz.hpp"

namespace lse {

/// Members of the atomic-norm denoising family  w ||z_Omega||_A + g(y_Omega - z_Omega).
enum class AndVariant {
  gl_lasso,      // (mu/2)(x + u_1) + (1/2)||y - z||^2
  gl_sr_lasso,   // (lambda/2)(x + u_1) + ||y - z||_2
  gl_lad_lasso,  // tau (x + u_1) + ||y - z||_1
  bp_noiseless,  // (1/2)(x + u_1) with z_Omega = y_Omega
};

std::string to_string(AndVariant v);
AndVariant and_variant_from_string(const std::string& s);

struct AndProblem {
  AndVariant variant = AndVariant::gl_lad_lasso;
  /// mu (Lasso), lambda (SR-Lasso) or tau (LAD-Lasso); ignored for BP.
  double weight = 1.0;
  Observation observation;

  static AndProblem lasso(Observation obs, double mu);
  static AndProblem sr_lasso(Observation obs, double lambda = 1.0);
  /// tau defaults to sqrt(L)/2, the value matching heteroscedastic GLS.
  static AndProblem lad_lasso(Observation obs, double tau = -1.0);
  static AndProblem basis_pursuit(Observation obs);

  /// Coefficient of ||z||_A in the objective.
  double norm_weight() const;
  prox::Fit fit() const;
  void validate() const;
};

struct SdpSolution;

struct SolverOptions {
  double beta = 1.0;
  /// <= 0 selects 1e-6 * (M + 1).
  double tol_abs = -1.0;
  double tol_rel = 1e-6;
  int max_iter = 50000;
  bool adaptive_beta = true;
  int max_rescales = 10;
  int rescale_interval = 10;
  double rescale_ratio = 5.0;
  double rescale_factor = 2.0;
  /// Previous solution on the same index set; seeds Q, Lambda and beta.
  const SdpSolution* warm_start = nullptr;
  bool record_history = false;

  void validate() const;
};

struct SdpSolution {
  double x = 0.0;
  ToeplitzParam u;
  VectorXcd z;  // length M, including the inferred entries off Omega
  MatrixXcd Q;
  MatrixXcd Lambda;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double beta = 1.0;
  bool converged = false;
  /// max(primal, dual) residual per iteration, when requested.
  std::vector<double> history;

  /// Observed part z_Omega.
  VectorXcd z_observed(const SampleSet& omega) const;
};

/// Bordered matrix [x z^H; z T(u)].
MatrixXcd bordered_matrix(double x, const ToeplitzParam& u, const VectorXcd& z);

/// ADMM over the bordered-Toeplitz PSD cone. Non-convergence is reported through
/// `converged`; non-finite iterates throw SolverError.
SdpSolution solve_and(const AndProblem& problem, const SolverOptions& opts = {});

/// Objective of `problem` evaluated at (x, u, z).
double and_objective(const AndProblem& problem, double x, const ToeplitzParam& u,
                     const VectorXcd& z);

struct MuStarResult {
  double mu_star = 0.0;
  double p_star = 0.0;
  int iterations = 0;
};

/// Regularization bound for Gaussian noise of variance sigma on L samples spanning M_bar.
MuStarResult mu_star(int L, int M_bar, double sigma);

struct AtomicNormResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// ||z_Omega||_{A(Omega)} via the noiseless (equality-constrained) program.
AtomicNormResult atomic_norm(const VectorXcd& z_obs, const SampleSet& omega,
                             const SolverOptions& opts = {});

struct DualPolynomialPoint {
  double f;
  double value;
};

/// |<v, a_Omega(f)>| on f = k / grid_size.
std::vector<DualPolynomialPoint> dual_polynomial(const VectorXcd& v, const SampleSet& omega,
                                                 int grid_size);

/// max over the grid of dual_polynomial.
double dual_norm_estimate(const VectorXcd& v, const SampleSet& omega, int grid_size);

struct LassoCertificate {
  SdpSolution solution;
  double mu = 0.0;
  int grid_size = 0;
  /// max_f |<(y - z_Omega) / mu, a_Omega(f)>| over the grid.
  double dual_max = 0.0;
  /// Grid local maxima of the dual polynomial above 1 - peak_tol, ascending in f.
  std::vector<double> peaks;
  double q_min_eig = 0.0;
  double q_max_eig = 0.0;
  bool dual_ok = false;
  bool psd_ok = false;
};

/// Solves the Lasso member and checks dual feasibility and the PSD variable.
LassoCertificate certify_lasso(const Observation& obs, double mu, const SolverOptions& opts = {},
                               int grid_size = 1 << 14, double dual_tol = 1e-3,
                               double psd_tol = 1e-8, double peak_tol = 1e-2);

struct GlsObjectiveValue {
  /// +infinity when y is outside the range of R_Omega.
  double value = 0.0;
  bool finite = true;
  /// ||(I - P_R) y|| / ||y||
  double range_residual = 0.0;
  std::string diagnostic;
};

/// tr(R_Omega) + ||y||^2 y^H R_Omega^+ y with R_Omega = Gamma T(u) Gamma^T + diag(sigma).
GlsObjectiveValue gls_objective(const ToeplitzParam& u, const VectorXd& sigma,
                                const Observation& obs);

}  // namespace lse
