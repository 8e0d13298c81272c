#include "lse/solver.hpp"

#include <algorithm>
#include <cmath>

#include "lse/linalg.hpp"

namespace lse {

std::string to_string(AndVariant v) {
  switch (v) {
    case AndVariant::gl_lasso:
      return "gl_lasso";
    case AndVariant::gl_sr_lasso:
      return "gl_sr_lasso";
    case AndVariant::gl_lad_lasso:
      return "gl_lad_lasso";
    case AndVariant::bp_noiseless:
      return "bp_noiseless";
  }
  return "unknown";
}

AndVariant and_variant_from_string(const std::string& s) {
  if (s == "gl_lasso" || s == "lasso" || s == "ast") return AndVariant::gl_lasso;
  if (s == "gl_sr_lasso" || s == "sr" || s == "sr_lasso") return AndVariant::gl_sr_lasso;
  if (s == "gl_lad_lasso" || s == "lad" || s == "lad_lasso") return AndVariant::gl_lad_lasso;
  if (s == "bp_noiseless" || s == "bp") return AndVariant::bp_noiseless;
  throw InvalidArgument("unknown AND variant '" + s + "'");
}

AndProblem AndProblem::lasso(Observation obs, double mu) {
  return {AndVariant::gl_lasso, mu, std::move(obs)};
}

AndProblem AndProblem::sr_lasso(Observation obs, double lambda) {
  return {AndVariant::gl_sr_lasso, lambda, std::move(obs)};
}

AndProblem AndProblem::lad_lasso(Observation obs, double tau) {
  if (tau <= 0) tau = std::sqrt(static_cast<double>(obs.sample_set.L())) / 2.0;
  return {AndVariant::gl_lad_lasso, tau, std::move(obs)};
}

AndProblem AndProblem::basis_pursuit(Observation obs) {
  return {AndVariant::bp_noiseless, 1.0, std::move(obs)};
}

double AndProblem::norm_weight() const {
  switch (variant) {
    case AndVariant::gl_lasso:
    case AndVariant::gl_sr_lasso:
      return weight;
    case AndVariant::gl_lad_lasso:
      return 2.0 * weight;
    case AndVariant::bp_noiseless:
      return 1.0;
  }
  return 1.0;
}

prox::Fit AndProblem::fit() const {
  switch (variant) {
    case AndVariant::gl_lasso:
      return prox::Fit::squared;
    case AndVariant::gl_sr_lasso:
      return prox::Fit::l2;
    case AndVariant::gl_lad_lasso:
      return prox::Fit::l1;
    case AndVariant::bp_noiseless:
      return prox::Fit::exact;
  }
  return prox::Fit::exact;
}

void AndProblem::validate() const {
  observation.validate();
  if (observation.sample_set.L() == 0) throw InvalidArgument("AND problem: empty observation");
  if (variant == AndVariant::gl_sr_lasso ? !(weight >= 0) : !(weight > 0))
    throw InvalidArgument("AND problem: regularization weight out of range");
}

void SolverOptions::validate() const {
  if (!(beta > 0)) throw InvalidArgument("solver options: beta must be positive");
  if (!(tol_rel > 0)) throw InvalidArgument("solver options: tol_rel must be positive");
  if (max_iter <= 0) throw InvalidArgument("solver options: max_iter must be positive");
  if (!(rescale_factor > 1) || !(rescale_ratio > 1) || rescale_interval <= 0)
    throw InvalidArgument("solver options: invalid beta rescaling parameters");
}

VectorXcd SdpSolution::z_observed(const SampleSet& omega) const {
  VectorXcd out(omega.L());
  for (int j = 0; j < omega.L(); ++j) out[j] = z[omega.omega()[j] - 1];
  return out;
}

MatrixXcd bordered_matrix(double x, const ToeplitzParam& u, const VectorXcd& z) {
  const Eigen::Index M = u.size();
  MatrixXcd G(M + 1, M + 1);
  G(0, 0) = x;
  G.block(1, 0, M, 1) = z;
  G.block(0, 1, 1, M) = z.adjoint();
  G.bottomRightCorner(M, M) = toeplitz_from_u(u);
  return G;
}

double and_objective(const AndProblem& problem, double x, const ToeplitzParam& u,
                     const VectorXcd& z) {
  const SampleSet& omega = problem.observation.sample_set;
  VectorXcd r(omega.L());
  for (int j = 0; j < omega.L(); ++j) r[j] = problem.observation.y[j] - z[omega.omega()[j] - 1];
  return 0.5 * problem.norm_weight() * (x + u.u1()) + prox::fit_value(problem.fit(), r);
}

namespace {

// The (x, u, z) block of the ADMM step: exact minimizer of the augmented Lagrangian
// given V = Q + Lambda / beta. `c` is the coefficient of (x + u_1).
struct BlockUpdate {
  double x;
  VectorXcd u;
  VectorXcd z;
};

BlockUpdate minimize_block(const MatrixXcd& V, double c, double beta, const AndProblem& problem,
                           const VectorXcd& y_scaled, const std::vector<int>& obs_pos) {
  const Eigen::Index M = V.rows() - 1;
  BlockUpdate out;
  out.x = V(0, 0).real() - c / beta;

  out.u.resize(M);
  {
    double diag = 0;
    for (Eigen::Index j = 1; j <= M; ++j) diag += V(j, j).real();
    out.u[0] = diag / static_cast<double>(M) - c / (beta * static_cast<double>(M));
  }
  for (Eigen::Index m = 1; m < M; ++m) {
    cplx acc = 0;
    for (Eigen::Index j = 1; j + m <= M; ++j) acc += V(j, j + m) + std::conj(V(j + m, j));
    out.u[m] = acc / (2.0 * static_cast<double>(M - m));
  }

  out.z.resize(M);
  for (Eigen::Index j = 0; j < M; ++j) out.z[j] = 0.5 * (V(j + 1, 0) + std::conj(V(0, j + 1)));

  const Eigen::Index L = static_cast<Eigen::Index>(obs_pos.size());
  VectorXcd d(L);
  for (Eigen::Index j = 0; j < L; ++j) d[j] = y_scaled[j] - out.z[obs_pos[j]];
  // beta |z - w|^2 per border entry appears twice in the Frobenius norm: rho = 2 beta.
  const VectorXcd r = prox::residual_prox(problem.fit(), d, 2.0 * beta);
  for (Eigen::Index j = 0; j < L; ++j) out.z[obs_pos[j]] = y_scaled[j] - r[j];
  return out;
}

void fill_bordered(MatrixXcd& G, const BlockUpdate& b) {
  const Eigen::Index M = b.u.size();
  G(0, 0) = b.x;
  for (Eigen::Index j = 0; j < M; ++j) {
    G(j + 1, 0) = b.z[j];
    G(0, j + 1) = std::conj(b.z[j]);
  }
  for (Eigen::Index j = 0; j < M; ++j) {
    G(j + 1, j + 1) = b.u[0].real();
    for (Eigen::Index k = j + 1; k < M; ++k) {
      G(j + 1, k + 1) = b.u[k - j];
      G(k + 1, j + 1) = std::conj(b.u[k - j]);
    }
  }
}

}  // namespace

SdpSolution solve_and(const AndProblem& problem, const SolverOptions& opts) {
  problem.validate();
  opts.validate();
  const Observation& obs = problem.observation;
  const SampleSet& omega = obs.sample_set;
  const int M = omega.M();
  const int L = omega.L();
  const std::vector<int> obs_pos = omega.zero_based();

  SdpSolution sol;
  sol.beta = opts.beta;
  const double y_norm = obs.y.norm();
  if (y_norm == 0.0) {
    sol.u = ToeplitzParam::zero(M);
    sol.z = VectorXcd::Zero(M);
    sol.Q = MatrixXcd::Zero(M + 1, M + 1);
    sol.Lambda = MatrixXcd::Zero(M + 1, M + 1);
    sol.converged = true;
    return sol;
  }

  // Work with data of unit RMS amplitude. LAD/SR/BP are positively homogeneous of degree 1
  // in (y, x, u, z); Lasso is homogeneous of degree 2 once mu is scaled with y.
  const double scale = y_norm / std::sqrt(static_cast<double>(L));
  const bool lasso = problem.variant == AndVariant::gl_lasso;
  const double lambda_scale = lasso ? scale : 1.0;
  const VectorXcd y = obs.y / scale;
  const double c = 0.5 * problem.norm_weight() / (lasso ? scale : 1.0);

  const double tol_abs = opts.tol_abs > 0 ? opts.tol_abs : 1e-6 * (M + 1);
  double beta = opts.beta;

  MatrixXcd Q = MatrixXcd::Zero(M + 1, M + 1);
  MatrixXcd Lambda = MatrixXcd::Zero(M + 1, M + 1);
  if (const SdpSolution* ws = opts.warm_start) {
    if (ws->Q.rows() != M + 1 || ws->Lambda.rows() != M + 1)
      throw InvalidArgument("solve_and: warm start has the wrong dimension");
    Q = ws->Q / scale;
    Lambda = ws->Lambda / lambda_scale;
    beta = ws->beta;
  }

  MatrixXcd G(M + 1, M + 1);
  BlockUpdate blk;
  int rescales = 0;
  int positive_count = -1;
  double r_pri = 0, r_dual = 0;
  int it = 0;
  bool converged = false;
  for (it = 1; it <= opts.max_iter; ++it) {
    blk = minimize_block(Q + Lambda / beta, c, beta, problem, y, obs_pos);
    fill_bordered(G, blk);
    if (!G.allFinite()) throw SolverError("solve_and: non-finite iterate at iteration " + std::to_string(it));

    MatrixXcd Q_next = psd_project(G - Lambda / beta, &positive_count);
    const MatrixXcd gap = Q_next - G;
    Lambda += beta * gap;
    r_pri = gap.norm();
    r_dual = beta * (Q_next - Q).norm();
    Q = std::move(Q_next);

    const double eps_pri = tol_abs + opts.tol_rel * std::max(Q.norm(), G.norm());
    const double eps_dual = tol_abs + opts.tol_rel * Lambda.norm();
    if (opts.record_history) sol.history.push_back(std::max(r_pri, r_dual) * scale);
    if (r_pri <= eps_pri && r_dual <= eps_dual) {
      converged = true;
      break;
    }
    if (opts.adaptive_beta && rescales < opts.max_rescales && it % opts.rescale_interval == 0) {
      if (r_pri > opts.rescale_ratio * r_dual) {
        beta *= opts.rescale_factor;
        ++rescales;
      } else if (r_dual > opts.rescale_ratio * r_pri) {
        beta /= opts.rescale_factor;
        ++rescales;
      }
    }
  }

  sol.x = blk.x * scale;
  sol.u = ToeplitzParam(blk.u * scale, 1e-8);
  sol.z = blk.z * scale;
  sol.Q = Q * scale;
  sol.Lambda = Lambda * lambda_scale;
  sol.iterations = std::min(it, opts.max_iter);
  sol.primal_residual = r_pri * scale;
  sol.dual_residual = r_dual * scale;
  sol.beta = beta;
  sol.converged = converged;
  sol.objective = and_objective(problem, sol.x, sol.u, sol.z);
  return sol;
}

MuStarResult mu_star(int L, int M_bar, double sigma) {
  if (L < 1 || M_bar < 2 || !(sigma > 0))
    throw InvalidArgument("mu_star: need L >= 1, M_bar >= 2, sigma > 0");
  MuStarResult res;
  const double shift = 2.0 * std::log(M_PI * M_bar) + 3.0;
  double p = 3.0;
  for (res.iterations = 1; res.iterations <= 10000; ++res.iterations) {
    const double next = 2.0 * std::log(p) + shift;
    const double delta = std::abs(next - p);
    p = next;
    if (delta < 1e-10) break;
  }
  res.p_star = p;
  res.mu_star = p / (p - 1.0) *
                std::sqrt(L * (std::log(static_cast<double>(M_bar)) + std::log(M_PI * p) + 1.0)) *
                std::sqrt(sigma);
  return res;
}

AtomicNormResult atomic_norm(const VectorXcd& z_obs, const SampleSet& omega,
                             const SolverOptions& opts) {
  Observation obs;
  obs.y = z_obs;
  obs.sample_set = omega;
  const SdpSolution sol = solve_and(AndProblem::basis_pursuit(std::move(obs)), opts);
  return {sol.objective, sol.converged, sol.iterations};
}

std::vector<DualPolynomialPoint> dual_polynomial(const VectorXcd& v, const SampleSet& omega,
                                                 int grid_size) {
  if (grid_size < 2) throw InvalidArgument("dual_polynomial: grid_size must be >= 2");
  if (v.size() != omega.L()) throw InvalidArgument("dual_polynomial: length of v must equal L");
  // Twiddle table indexed exactly by ((Omega_j - 1) k) mod N.
  std::vector<cplx> twiddle(grid_size);
  for (int n = 0; n < grid_size; ++n) twiddle[n] = std::polar(1.0, -kTwoPi * n / grid_size);
  std::vector<DualPolynomialPoint> out(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    cplx acc = 0;
    for (int j = 0; j < omega.L(); ++j) {
      const long long idx = (static_cast<long long>(omega.omega()[j] - 1) * k) % grid_size;
      acc += v[j] * twiddle[idx];
    }
    out[k] = {static_cast<double>(k) / grid_size, std::abs(acc)};
  }
  return out;
}

double dual_norm_estimate(const VectorXcd& v, const SampleSet& omega, int grid_size) {
  double best = 0;
  for (const auto& p : dual_polynomial(v, omega, grid_size)) best = std::max(best, p.value);
  return best;
}

LassoCertificate certify_lasso(const Observation& obs, double mu, const SolverOptions& opts,
                               int grid_size, double dual_tol, double psd_tol, double peak_tol) {
  LassoCertificate c;
  c.mu = mu;
  c.grid_size = grid_size;
  c.solution = solve_and(AndProblem::lasso(obs, mu), opts);
  const VectorXcd v = (obs.y - c.solution.z_observed(obs.sample_set)) / mu;
  const auto poly = dual_polynomial(v, obs.sample_set, grid_size);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const double a = poly[k].value;
    c.dual_max = std::max(c.dual_max, a);
    const double prev = poly[(k + poly.size() - 1) % poly.size()].value;
    const double next = poly[(k + 1) % poly.size()].value;
    if (a >= 1.0 - peak_tol && a >= prev && a > next) c.peaks.push_back(poly[k].f);
  }
  const VectorXd eig = eigvalsh(c.solution.Q);
  c.q_min_eig = eig.minCoeff();
  c.q_max_eig = eig.maxCoeff();
  c.dual_ok = c.dual_max <= 1.0 + dual_tol;
  c.psd_ok = c.q_min_eig >= -psd_tol * std::max(c.q_max_eig, 0.0);
  return c;
}

GlsObjectiveValue gls_objective(const ToeplitzParam& u, const VectorXd& sigma,
                                const Observation& obs) {
  const SampleSet& omega = obs.sample_set;
  const int L = omega.L();
  if (sigma.size() != L) throw InvalidArgument("gls_objective: sigma length must equal L");
  if ((sigma.array() < 0).any()) throw InvalidArgument("gls_objective: sigma must be >= 0");
  if (u.size() != omega.M()) throw InvalidArgument("gls_objective: u length must equal M");

  const MatrixXcd T = toeplitz_from_u(u);
  const std::vector<int> pos = omega.zero_based();
  MatrixXcd R(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) R(a, b) = T(pos[a], pos[b]);
  R.diagonal() += sigma.cast<cplx>();

  GlsObjectiveValue out;
  const double y2 = obs.y.squaredNorm();
  const double trace = R.diagonal().real().sum();
  if (y2 == 0.0) {
    out.value = trace;
    return out;
  }
  const HermitianEigen es = eigh(R);
  const double lmax = std::max(es.values.maxCoeff(), 0.0);
  const double cutoff = 1e-13 * lmax;
  const VectorXcd proj = es.vectors.adjoint() * obs.y;
  double quad = 0, outside = 0;
  for (int i = 0; i < L; ++i) {
    if (es.values[i] > cutoff)
      quad += std::norm(proj[i]) / es.values[i];
    else
      outside += std::norm(proj[i]);
  }
  out.range_residual = std::sqrt(outside / y2);
  if (out.range_residual > 1e-8) {
    out.finite = false;
    out.value = std::numeric_limits<double>::infinity();
    out.diagnostic = "y is outside the range of R_Omega (relative residual " +
                     std::to_string(out.range_residual) + ")";
    return out;
  }
  out.value = trace + y2 * quad;
  return out;
}

}  // namespace lse
