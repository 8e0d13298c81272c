#include "lse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lse {

GridDictionary build_dictionary(int N, const SampleSet& omega) {
  if (N < 2) throw InvalidArgument("build_dictionary: N must be >= 2");
  GridDictionary d;
  d.N = N;
  d.sample_set = omega;
  d.freqs.resize(N);
  const std::vector<int> pos = omega.zero_based();
  d.matrix.resize(omega.L(), N);
  // Exact twiddles: entry (j, k) is exp(i 2 pi ((pos_j * k) mod N) / N).
  std::vector<cplx> twiddle(N);
  for (int n = 0; n < N; ++n) twiddle[n] = std::polar(1.0, kTwoPi * n / N);
  for (int k = 0; k < N; ++k) {
    d.freqs[k] = static_cast<double>(k) / N;
    for (int j = 0; j < omega.L(); ++j)
      d.matrix(j, k) = twiddle[(static_cast<long long>(pos[j]) * k) % N];
  }
  return d;
}

void GridOptions::validate() const {
  if (!(rho > 0) || !(tol_abs > 0) || !(tol_rel > 0) || max_iter <= 0)
    throw InvalidArgument("grid options: rho, tolerances and max_iter must be positive");
  if (!(rescale_factor > 1) || !(rescale_ratio > 1) || rescale_interval <= 0)
    throw InvalidArgument("grid options: invalid rho rescaling parameters");
  if (!(support_tol >= 0)) throw InvalidArgument("grid options: support_tol must be >= 0");
}

namespace {

AndProblem as_problem(const GridVariant& v, const Observation& obs) {
  switch (v.variant) {
    case AndVariant::gl_lasso:
      return AndProblem::lasso(obs, v.weight);
    case AndVariant::gl_sr_lasso:
      return AndProblem::sr_lasso(obs, v.weight);
    case AndVariant::gl_lad_lasso:
      return AndProblem::lad_lasso(obs, v.weight);
    case AndVariant::bp_noiseless:
      return AndProblem::basis_pursuit(obs);
  }
  throw InvalidArgument("grid: unhandled variant");
}

void check_dictionary(const GridDictionary& dict, const Observation& obs) {
  obs.validate();
  if (!(dict.sample_set == obs.sample_set))
    throw InvalidArgument("grid: dictionary and observation use different index sets");
}

}  // namespace

double grid_objective(const GridVariant& variant, const GridDictionary& dict,
                      const Observation& obs, const VectorXcd& s) {
  check_dictionary(dict, obs);
  if (s.size() != dict.N) throw InvalidArgument("grid_objective: s must have length N");
  const AndProblem p = as_problem(variant, obs);
  return p.norm_weight() * s.cwiseAbs().sum() + prox::fit_value(p.fit(), obs.y - dict.matrix * s);
}

std::vector<int> grid_peaks(const VectorXcd& s, int count) {
  const int N = static_cast<int>(s.size());
  std::vector<int> peaks;
  for (int j = 0; j < N; ++j) {
    const double a = std::abs(s[j]);
    if (a == 0) continue;
    const double prev = std::abs(s[(j + N - 1) % N]);
    const double next = std::abs(s[(j + 1) % N]);
    if (a >= prev && a > next) peaks.push_back(j);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](int a, int b) { return std::abs(s[a]) > std::abs(s[b]); });
  if (count >= 0 && static_cast<int>(peaks.size()) > count) peaks.resize(count);
  return peaks;
}

GridSolution solve_grid_l1nd(const GridVariant& variant, const GridDictionary& dict,
                             const Observation& obs, const GridOptions& opts) {
  check_dictionary(dict, obs);
  opts.validate();
  const AndProblem problem = as_problem(variant, obs);
  problem.validate();
  const int N = dict.N;
  const int L = obs.sample_set.L();

  GridSolution sol;
  sol.s = VectorXcd::Zero(N);
  const double y_norm = obs.y.norm();
  if (y_norm == 0.0) {
    sol.converged = true;
    return sol;
  }
  const double scale = y_norm / std::sqrt(static_cast<double>(L));
  const bool lasso = problem.variant == AndVariant::gl_lasso;
  const VectorXcd y = obs.y / scale;
  const prox::Fit fit = problem.fit();
  // Iterate on s' = ||A|| s with the dictionary normalized to unit spectral norm.
  MatrixXcd A = dict.matrix * dict.matrix.adjoint();
  const double a_norm = std::sqrt(Eigen::SelfAdjointEigenSolver<MatrixXcd>(A, Eigen::EigenvaluesOnly)
                                      .eigenvalues()
                                      .maxCoeff());
  A = dict.matrix / a_norm;
  const double w = problem.norm_weight() / (lasso ? scale : 1.0) / a_norm;

  // (I + A^H A)^{-1} b = b - A^H (I + A A^H)^{-1} A b
  MatrixXcd K = A * A.adjoint();
  K.diagonal().array() += 1.0;
  const Eigen::LLT<MatrixXcd> chol(K);
  if (chol.info() != Eigen::Success) throw SolverError("solve_grid_l1nd: factorization failed");

  VectorXcd s = VectorXcd::Zero(N), t = VectorXcd::Zero(N), r = y;
  VectorXcd v1 = VectorXcd::Zero(L), v2 = VectorXcd::Zero(N);
  double rho = opts.rho;
  int rescales = 0;
  bool converged = false;
  double r_pri = 0, r_dual = 0;
  int it = 0;
  const double sqrt_n = std::sqrt(static_cast<double>(N));
  const double sqrt_ln = std::sqrt(static_cast<double>(L + N));
  for (it = 1; it <= opts.max_iter; ++it) {
    const VectorXcd b = A.adjoint() * (y - r - v1) + (t - v2);
    s = b - A.adjoint() * chol.solve(A * b);
    const VectorXcd As = A * s;

    const VectorXcd t_old = t, r_old = r;
    t = prox::soft(s + v2, w / rho);
    r = prox::residual_prox(fit, y - As - v1, rho);

    const VectorXcd res1 = As + r - y;
    const VectorXcd res2 = s - t;
    v1 += res1;
    v2 += res2;
    if (!v1.allFinite() || !v2.allFinite())
      throw SolverError("solve_grid_l1nd: non-finite iterate at iteration " + std::to_string(it));

    r_pri = std::sqrt(res1.squaredNorm() + res2.squaredNorm());
    r_dual = rho * (A.adjoint() * (r - r_old) - (t - t_old)).norm();
    const double eps_pri =
        opts.tol_abs * sqrt_ln +
        opts.tol_rel * std::max({std::sqrt(As.squaredNorm() + s.squaredNorm()),
                                 std::sqrt(r.squaredNorm() + t.squaredNorm()), y.norm()});
    const double eps_dual =
        opts.tol_abs * sqrt_n + opts.tol_rel * rho * (A.adjoint() * v1 + v2).norm();
    if (r_pri <= eps_pri && r_dual <= eps_dual) {
      converged = true;
      break;
    }
    if (opts.adaptive_rho && rescales < opts.max_rescales && it % opts.rescale_interval == 0) {
      double factor = 1.0;
      if (r_pri > opts.rescale_ratio * r_dual)
        factor = opts.rescale_factor;
      else if (r_dual > opts.rescale_ratio * r_pri)
        factor = 1.0 / opts.rescale_factor;
      if (factor != 1.0) {
        rho *= factor;
        v1 /= factor;
        v2 /= factor;
        ++rescales;
      }
    }
  }

  sol.s = t * (scale / a_norm);
  sol.iterations = std::min(it, opts.max_iter);
  sol.converged = converged;
  sol.primal_residual = r_pri * scale;
  sol.dual_residual = r_dual * scale;
  sol.constraint_residual = (obs.y - dict.matrix * sol.s).norm();
  sol.objective = grid_objective(variant, dict, obs, sol.s);
  const double smax = sol.s.cwiseAbs().maxCoeff();
  for (int j = 0; j < N; ++j)
    if (smax > 0 && std::abs(sol.s[j]) > opts.support_tol * smax) sol.support.push_back(j);
  return sol;
}

SandwichReport sandwich_check(const Observation& obs, int N, const GridVariant& variant,
                              double rel_slack, const SolverOptions& solver,
                              const GridOptions& grid) {
  SandwichReport rep;
  rep.N = N;
  const GridDictionary dict = build_dictionary(N, obs.sample_set);
  const GridSolution gs = solve_grid_l1nd(variant, dict, obs, grid);
  const SdpSolution sdp = solve_and(as_problem(variant, obs), solver);
  rep.grid_opt = gs.objective;
  rep.gridless_opt = sdp.objective;
  rep.converged = gs.converged && sdp.converged;
  rep.lower_factor = 1.0 - M_PI * obs.sample_set.M_bar() / static_cast<double>(N);
  rep.vacuous_lower = rep.lower_factor <= 0;
  rep.lower = rep.lower_factor * rep.grid_opt;
  rep.upper = rep.grid_opt * (1.0 + rel_slack);
  rep.lower_ok = rep.lower <= rep.gridless_opt;
  rep.upper_ok = rep.gridless_opt <= rep.upper;
  rep.pass = rep.lower_ok && rep.upper_ok;
  return rep;
}

}  // namespace lse
