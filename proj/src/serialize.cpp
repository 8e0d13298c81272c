#include "lse/serialize.hpp"

#include <cmath>

namespace lse::serial {

json complex_vector(const VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

VectorXcd complex_vector_from(const json& j) {
  if (!j.is_array()) throw InvalidArgument("expected an array of [re, im] pairs");
  VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    if (e.is_number()) {
      v[static_cast<Eigen::Index>(i)] = e.get<double>();
    } else if (e.is_array() && e.size() == 2) {
      v[static_cast<Eigen::Index>(i)] = cplx(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InvalidArgument("expected [re, im] at position " + std::to_string(i));
    }
  }
  return v;
}

namespace {

json matrix_json(const MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(complex_vector(m.row(r).transpose()));
  return rows;
}

json vec(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

json to_json(const LineSpectralModel& m) {
  VectorXcd a = Eigen::Map<const VectorXcd>(m.amps.data(), static_cast<Eigen::Index>(m.amps.size()));
  return {{"freqs", m.freqs}, {"amps", complex_vector(a)}, {"powers", m.powers()}};
}

LineSpectralModel model_from_json(const json& j, Rng* rng) {
  LineSpectralModel m;
  m.freqs = j.at("freqs").get<std::vector<double>>();
  if (j.contains("amps")) {
    const VectorXcd a = complex_vector_from(j.at("amps"));
    m.amps.assign(a.data(), a.data() + a.size());
  } else if (j.contains("powers")) {
    const auto p = j.at("powers").get<std::vector<double>>();
    if (rng) return LineSpectralModel::from_powers(m.freqs, p, *rng);
    if (p.size() != m.freqs.size()) throw InvalidArgument("model: freqs/powers size mismatch");
    for (double pk : p) {
      if (pk < 0) throw InvalidArgument("model: powers must be nonnegative");
      m.amps.emplace_back(std::sqrt(pk), 0.0);
    }
  } else {
    throw InvalidArgument("model: need \"amps\" or \"powers\"");
  }
  m.validate();
  return m;
}

SamplingSpec sampling_from_json(const json& j) {
  const std::string kind = j.value("kind", "complete");
  if (kind == "complete") return sampling::Complete{};
  if (kind == "explicit") return sampling::Explicit{j.at("indices").get<std::vector<int>>()};
  if (kind == "random") return sampling::Random{j.at("L").get<int>(), j.value("seed", std::uint64_t{0})};
  throw InvalidArgument("sampling: unknown kind '" + kind + "'");
}

json to_json(const SampleSet& s) { return {{"M", s.M()}, {"omega", s.omega()}}; }

NoiseSpec noise_from_json(const json& j, int L) {
  const std::string kind = j.value("kind", j.contains("sigmas") ? "heteroscedastic"
                                           : (j.contains("sigma") || j.contains("snr_db"))
                                               ? "homoscedastic"
                                               : "none");
  NoiseSpec n;
  if (kind == "none") {
    n = NoiseSpec::none();
  } else if (kind == "homoscedastic") {
    if (j.contains("sigma"))
      n = NoiseSpec::homoscedastic(j.at("sigma").get<double>());
    else
      n = NoiseSpec::homoscedastic(snr_to_sigma(j.at("snr_db").get<double>()));
  } else if (kind == "heteroscedastic") {
    n = NoiseSpec::heteroscedastic(j.at("sigmas").get<std::vector<double>>());
  } else {
    throw InvalidArgument("noise: unknown kind '" + kind + "'");
  }
  n.validate(L);
  return n;
}

json to_json(const Observation& obs) {
  json j = {{"sample_set", to_json(obs.sample_set)}, {"y", complex_vector(obs.y)}};
  if (obs.truth) j["truth"] = to_json(*obs.truth);
  if (obs.sigma_truth) j["sigma_truth"] = vec(*obs.sigma_truth);
  return j;
}

Observation observation_from_json(const json& j) {
  Observation obs;
  const json& ss = j.at("sample_set");
  obs.sample_set = make_sample_set(ss.at("M").get<int>(),
                                   sampling::Explicit{ss.at("omega").get<std::vector<int>>()});
  obs.y = complex_vector_from(j.at("y"));
  if (j.contains("truth")) obs.truth = model_from_json(j.at("truth"));
  if (j.contains("sigma_truth")) {
    const auto v = j.at("sigma_truth").get<std::vector<double>>();
    obs.sigma_truth = Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  obs.validate();
  return obs;
}

SolverOptions solver_options_from_json(const json& j, SolverOptions o) {
  if (j.is_null()) return o;
  if (j.contains("tol")) o.tol_abs = o.tol_rel = j.at("tol").get<double>();
  o.beta = j.value("beta", o.beta);
  o.tol_abs = j.value("tol_abs", o.tol_abs);
  o.tol_rel = j.value("tol_rel", o.tol_rel);
  o.max_iter = j.value("max_iter", o.max_iter);
  o.adaptive_beta = j.value("adaptive_beta", o.adaptive_beta);
  o.max_rescales = j.value("max_rescales", o.max_rescales);
  o.rescale_interval = j.value("rescale_interval", o.rescale_interval);
  o.rescale_ratio = j.value("rescale_ratio", o.rescale_ratio);
  o.rescale_factor = j.value("rescale_factor", o.rescale_factor);
  o.validate();
  return o;
}

json to_json(const SolverOptions& o) {
  return {{"beta", o.beta},
          {"tol_abs", o.tol_abs},
          {"tol_rel", o.tol_rel},
          {"max_iter", o.max_iter},
          {"adaptive_beta", o.adaptive_beta},
          {"max_rescales", o.max_rescales},
          {"rescale_interval", o.rescale_interval},
          {"rescale_ratio", o.rescale_ratio},
          {"rescale_factor", o.rescale_factor}};
}

GridOptions grid_options_from_json(const json& j, GridOptions o) {
  if (j.is_null()) return o;
  if (j.contains("tol")) o.tol_abs = o.tol_rel = j.at("tol").get<double>();
  o.rho = j.value("rho", o.rho);
  o.tol_abs = j.value("tol_abs", o.tol_abs);
  o.tol_rel = j.value("tol_rel", o.tol_rel);
  o.max_iter = j.value("max_iter", o.max_iter);
  o.adaptive_rho = j.value("adaptive_rho", o.adaptive_rho);
  o.max_rescales = j.value("max_rescales", o.max_rescales);
  o.rescale_interval = j.value("rescale_interval", o.rescale_interval);
  o.rescale_ratio = j.value("rescale_ratio", o.rescale_ratio);
  o.rescale_factor = j.value("rescale_factor", o.rescale_factor);
  o.support_tol = j.value("support_tol", o.support_tol);
  o.validate();
  return o;
}

NoiseAssumption assumption_from_json(const json& j) {
  NoiseAssumption a;
  if (j.is_string()) {
    a.kind = noise_kind_from_string(j.get<std::string>());
  } else {
    a.kind = noise_kind_from_string(j.value("kind", "heteroscedastic"));
    a.sigma0 = j.value("sigma0", 0.0);
    const std::string w = j.value("known_weight", "scaled");
    if (w == "scaled")
      a.known_weight = NoiseAssumption::KnownWeight::scaled;
    else if (w == "sqrt")
      a.known_weight = NoiseAssumption::KnownWeight::sqrt;
    else
      throw InvalidArgument("noise assumption: known_weight must be 'scaled' or 'sqrt'");
  }
  a.validate();
  return a;
}

json to_json(const SdpSolution& s, bool full) {
  json j = {{"x", s.x},
            {"u", complex_vector(s.u.values())},
            {"z", complex_vector(s.z)},
            {"objective", s.objective},
            {"iterations", s.iterations},
            {"primal_residual", s.primal_residual},
            {"dual_residual", s.dual_residual},
            {"beta", s.beta},
            {"converged", s.converged}};
  if (!s.history.empty()) j["history"] = s.history;
  if (full) {
    j["Q"] = matrix_json(s.Q);
    j["Lambda"] = matrix_json(s.Lambda);
  }
  return j;
}

json to_json(const VandermondeResult& v) {
  return {{"freqs", v.freqs},
          {"powers", v.powers},
          {"rank", v.rank},
          {"residual", v.residual},
          {"ill_conditioned", v.ill_conditioned}};
}

json to_json(const GlsEstimate& e, bool full) {
  json j = {{"assumption", to_string(e.assumption.kind)},
            {"u_gls", complex_vector(e.u_gls.values())},
            {"freqs", e.freqs},
            {"powers", e.powers},
            {"sigma_star", vec(e.sigma_star)},
            {"sigma_hat", vec(e.sigma_hat)},
            {"delta", e.delta},
            {"shifted", e.shifted},
            {"K_raw", e.K_raw},
            {"ill_conditioned", e.ill_conditioned},
            {"converged", e.converged},
            {"and_solution", to_json(e.and_solution, full)}};
  if (e.assumption.kind == NoiseAssumption::Kind::known_variance) j["sigma0"] = e.assumption.sigma0;
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

namespace {

json case_json(const EquivalenceCase& c) {
  if (!c.evaluated) return nullptr;
  return {{"gls_objective", c.gls_objective},
          {"and_optimum", c.and_optimum},
          {"predicted", c.predicted},
          {"gap", c.gap},
          {"converged", c.converged}};
}

}  // namespace

json to_json(const EquivalenceReport& r) {
  json j = {{"heteroscedastic", case_json(r.heteroscedastic)},
            {"homoscedastic", case_json(r.homoscedastic)},
            {"known_variance", case_json(r.known_variance)}};
  if (r.known_variance.evaluated) j["sigma0"] = r.sigma0;
  return j;
}

json to_json(const SorteResult& r) {
  json stat = json::array();
  for (double s : r.statistic) stat.push_back(std::isfinite(s) ? json(s) : json(nullptr));
  return {{"K", r.K}, {"degenerate", r.degenerate}, {"statistic", stat}};
}

json to_json(const FrameworkResult& r) {
  return {{"K_sorte", r.K_sorte},
          {"sorte_degenerate", r.sorte_degenerate},
          {"K_used", r.K_used},
          {"freqs", r.freqs},
          {"amps", complex_vector(r.amps)},
          {"rank_deficient", r.rank_deficient},
          {"eigenvalues", r.eigenvalues}};
}

json to_json(const GridSolution& s, const GridDictionary& dict) {
  json support = json::array();
  for (int k : s.support)
    support.push_back({{"index", k},
                       {"f", dict.freqs[k]},
                       {"s", {s.s[k].real(), s.s[k].imag()}},
                       {"abs", std::abs(s.s[k])}});
  return {{"N", dict.N},
          {"objective", s.objective},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"primal_residual", s.primal_residual},
          {"dual_residual", s.dual_residual},
          {"constraint_residual", s.constraint_residual},
          {"support", support}};
}

json to_json(const SandwichReport& r) {
  return {{"N", r.N},
          {"grid_opt", r.grid_opt},
          {"gridless_opt", r.gridless_opt},
          {"lower_factor", r.lower_factor},
          {"lower", r.lower},
          {"upper", r.upper},
          {"vacuous_lower", r.vacuous_lower},
          {"lower_ok", r.lower_ok},
          {"upper_ok", r.upper_ok},
          {"pass", r.pass},
          {"converged", r.converged}};
}

json to_json(const MuStarResult& r) {
  return {{"mu_star", r.mu_star}, {"p_star", r.p_star}, {"iterations", r.iterations}};
}

json to_json(const LassoCertificate& c) {
  return {{"mu", c.mu},
          {"grid_size", c.grid_size},
          {"dual_max", c.dual_max},
          {"peaks", c.peaks},
          {"q_min_eig", c.q_min_eig},
          {"q_max_eig", c.q_max_eig},
          {"dual_ok", c.dual_ok},
          {"psd_ok", c.psd_ok},
          {"converged", c.solution.converged},
          {"solution", to_json(c.solution)}};
}

}  // namespace lse::serial
