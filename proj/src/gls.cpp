#include "lse/gls.hpp"

#include <cmath>

namespace lse {

void NoiseAssumption::validate() const {
  if (kind == Kind::known_variance && !(sigma0 > 0))
    throw InvalidArgument("noise assumption: known variance requires sigma0 > 0");
}

std::string to_string(NoiseAssumption::Kind k) {
  switch (k) {
    case NoiseAssumption::Kind::heteroscedastic:
      return "heteroscedastic";
    case NoiseAssumption::Kind::homoscedastic:
      return "homoscedastic";
    case NoiseAssumption::Kind::known_variance:
      return "known_variance";
  }
  return "unknown";
}

NoiseAssumption::Kind noise_kind_from_string(const std::string& s) {
  if (s == "heteroscedastic" || s == "hetero") return NoiseAssumption::Kind::heteroscedastic;
  if (s == "homoscedastic" || s == "homo") return NoiseAssumption::Kind::homoscedastic;
  if (s == "known_variance" || s == "known") return NoiseAssumption::Kind::known_variance;
  throw InvalidArgument("unknown noise assumption '" + s + "'");
}

AndProblem gls_equivalent_problem(const Observation& obs, const NoiseAssumption& a) {
  a.validate();
  const double sqrt_l = std::sqrt(static_cast<double>(obs.sample_set.L()));
  switch (a.kind) {
    case NoiseAssumption::Kind::heteroscedastic:
      return AndProblem::lad_lasso(obs, sqrt_l / 2.0);
    case NoiseAssumption::Kind::homoscedastic:
      return AndProblem::sr_lasso(obs, 1.0);
    case NoiseAssumption::Kind::known_variance: {
      const double y_norm = obs.y.norm();
      const double mu = a.known_weight == NoiseAssumption::KnownWeight::sqrt || y_norm == 0
                            ? sqrt_l * std::sqrt(a.sigma0)
                            : sqrt_l * a.sigma0 / y_norm;
      return AndProblem::lasso(obs, mu);
    }
  }
  throw InvalidArgument("gls: unhandled noise assumption");
}

namespace {

VectorXd reconstruct_sigma(const NoiseAssumption& a, const VectorXcd& r, double y_norm) {
  const Eigen::Index L = r.size();
  switch (a.kind) {
    case NoiseAssumption::Kind::heteroscedastic:
      return y_norm * r.cwiseAbs();
    case NoiseAssumption::Kind::homoscedastic:
      return VectorXd::Constant(L, y_norm * r.norm() / std::sqrt(static_cast<double>(L)));
    case NoiseAssumption::Kind::known_variance:
      return VectorXd::Constant(L, a.sigma0);
  }
  return VectorXd::Zero(L);
}

}  // namespace

GlsEstimate solve_gls(const Observation& obs, const NoiseAssumption& assumption,
                      const GlsOptions& opts) {
  assumption.validate();
  obs.validate();
  const SampleSet& omega = obs.sample_set;
  const int L = omega.L();
  if (L == 0) throw InvalidArgument("solve_gls: empty observation");

  GlsEstimate est;
  est.assumption = assumption;
  const AndProblem problem = gls_equivalent_problem(obs, assumption);
  est.and_solution = solve_and(problem, opts.solver);
  est.converged = est.and_solution.converged;

  const double y_norm = obs.y.norm();
  const double c = y_norm / std::sqrt(static_cast<double>(L));
  est.u_gls = ToeplitzParam(est.and_solution.u.values() * c, 1e-8);
  const VectorXcd r = obs.y - est.and_solution.z_observed(omega);
  est.sigma_star = reconstruct_sigma(assumption, r, y_norm);
  est.sigma_hat = est.sigma_star;
  if (y_norm == 0.0) return est;

  const SpectrumRetrieval sr = retrieve_spectrum(est.u_gls, opts.rank_tol);
  est.freqs = sr.decomposition.freqs;
  est.powers = sr.decomposition.powers;
  est.K_raw = sr.decomposition.rank;
  est.ill_conditioned = sr.decomposition.ill_conditioned;
  est.delta = sr.delta;
  est.shifted = sr.shifted;
  est.sigma_hat = (est.sigma_star.array() + est.delta).max(0.0);

  if (assumption.kind == NoiseAssumption::Kind::homoscedastic && omega.is_complete())
    est.note = "complete data with homoscedastic noise: R = T(u_gls + sigma_hat e_1) is Toeplitz";
  if (!est.converged) est.note += (est.note.empty() ? "" : "; ") + std::string("AND solve did not converge");
  return est;
}

namespace {

EquivalenceCase evaluate_case(const Observation& obs, const NoiseAssumption& a,
                              const GlsOptions& opts) {
  EquivalenceCase out;
  out.evaluated = true;
  const AndProblem problem = gls_equivalent_problem(obs, a);
  const SdpSolution sol = solve_and(problem, opts.solver);
  out.converged = sol.converged;
  out.and_optimum = sol.objective;

  const int L = obs.sample_set.L();
  const double y_norm = obs.y.norm();
  const double sqrt_l = std::sqrt(static_cast<double>(L));
  const ToeplitzParam u(sol.u.values() * (y_norm / sqrt_l), 1e-8);
  const VectorXcd r = obs.y - sol.z_observed(obs.sample_set);
  const VectorXd sigma = reconstruct_sigma(a, r, y_norm);
  out.gls_objective = gls_objective(u, sigma, obs).value;

  switch (a.kind) {
    case NoiseAssumption::Kind::heteroscedastic:
      out.predicted = 2.0 * y_norm * out.and_optimum;
      break;
    case NoiseAssumption::Kind::homoscedastic:
      out.predicted = 2.0 * sqrt_l * y_norm * out.and_optimum;
      break;
    case NoiseAssumption::Kind::known_variance:
      out.predicted = 2.0 * y_norm * y_norm / a.sigma0 * out.and_optimum + L * a.sigma0;
      break;
  }
  out.gap = out.gls_objective > 0 ? std::abs(out.gls_objective - out.predicted) / out.gls_objective
                                  : std::abs(out.gls_objective - out.predicted);
  return out;
}

}  // namespace

EquivalenceReport check_equivalence(const Observation& obs, const GlsOptions& opts,
                                    std::optional<double> sigma0) {
  EquivalenceReport rep;
  rep.heteroscedastic = evaluate_case(obs, NoiseAssumption::heteroscedastic(), opts);
  rep.homoscedastic = evaluate_case(obs, NoiseAssumption::homoscedastic(), opts);
  if (sigma0 && *sigma0 > 0) {
    rep.sigma0 = *sigma0;
    rep.known_variance = evaluate_case(obs, NoiseAssumption::known_variance(*sigma0), opts);
  }
  return rep;
}

}  // namespace lse
