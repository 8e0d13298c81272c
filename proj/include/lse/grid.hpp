#pragma once

#include "lse/solver.hpp"

namespace lse {

struct GridDictionary {
  int N = 0;
  std::vector<double> freqs;  // k / N
  MatrixXcd matrix;           // L x N, column k = a_Omega(k / N)
  SampleSet sample_set;
};

GridDictionary build_dictionary(int N, const SampleSet& omega);

/// Same regularization conventions as the gridless family: weight is mu, lambda or tau,
/// and the l1 penalty coefficient is AndProblem::norm_weight().
struct GridVariant {
  AndVariant variant = AndVariant::gl_lad_lasso;
  double weight = 1.0;

  static GridVariant lasso(double mu) { return {AndVariant::gl_lasso, mu}; }
  static GridVariant sr_lasso(double lambda = 1.0) { return {AndVariant::gl_sr_lasso, lambda}; }
  /// tau <= 0 selects sqrt(L)/2 at solve time.
  static GridVariant lad_lasso(double tau = -1.0) { return {AndVariant::gl_lad_lasso, tau}; }
  static GridVariant basis_pursuit() { return {AndVariant::bp_noiseless, 1.0}; }
};

struct GridOptions {
  double rho = 1.0;
  double tol_abs = 1e-7;
  double tol_rel = 1e-6;
  int max_iter = 50000;
  bool adaptive_rho = true;
  int max_rescales = 10;
  int rescale_interval = 10;
  double rescale_ratio = 5.0;
  double rescale_factor = 2.0;
  double support_tol = 1e-3;

  void validate() const;
};

struct GridSolution {
  VectorXcd s;
  double objective = 0.0;
  /// Indices with |s_j| > support_tol * max |s|.
  std::vector<int> support;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// ||y - A s|| for the basis-pursuit variant.
  double constraint_residual = 0.0;
};

/// min w ||s||_1 + g(y - A s) by ADMM with the splittings r = y - A s and s = t.
GridSolution solve_grid_l1nd(const GridVariant& variant, const GridDictionary& dict,
                             const Observation& obs, const GridOptions& opts = {});

/// The variant's objective at s.
double grid_objective(const GridVariant& variant, const GridDictionary& dict,
                      const Observation& obs, const VectorXcd& s);

/// Indices of local maxima of |s| over the circular grid, largest first.
std::vector<int> grid_peaks(const VectorXcd& s, int count);

struct SandwichReport {
  int N = 0;
  double grid_opt = 0.0;
  double gridless_opt = 0.0;
  /// 1 - pi M_bar / N
  double lower_factor = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool vacuous_lower = false;
  bool lower_ok = false;
  bool upper_ok = false;
  bool pass = false;
  bool converged = false;
};

/// (1 - pi M_bar / N) grid_opt <= gridless_opt <= grid_opt (1 + rel_slack).
SandwichReport sandwich_check(const Observation& obs, int N, const GridVariant& variant,
                              double rel_slack = 1e-4, const SolverOptions& solver = {},
                              const GridOptions& grid = {});

}  // namespace lse
