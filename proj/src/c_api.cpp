#include "lse/lse.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "lse/harness.hpp"
#include "lse/io.hpp"

struct lse_observation {
  lse::Observation obs;
};

namespace {

using lse::serial::json;

thread_local std::string last_error;

lse_status fail(lse_status code, const std::string& what) {
  last_error = what;
  return code;
}

template <class F>
lse_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return LSE_OK;
  } catch (const lse::Error& e) {
    return fail(static_cast<lse_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(LSE_ERR_INVALID_ARGUMENT, std::string("json: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(LSE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LSE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LSE_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw lse::InvalidArgument("options must be a JSON object");
  return j;
}

const lse::Observation& get(const lse_observation* obs) {
  if (!obs) throw lse::InvalidArgument("observation handle is null");
  return obs->obs;
}

void need_out(const void* p) {
  if (!p) throw lse::InvalidArgument("output pointer is null");
}

lse::SolverOptions solver_of(const json& o) {
  return o.contains("solver") ? lse::serial::solver_options_from_json(o.at("solver")) : lse::SolverOptions{};
}

lse::AndProblem problem_of(const lse::Observation& obs, const json& o) {
  const std::string v = o.value("variant", "lad");
  const lse::AndVariant variant = lse::and_variant_from_string(v);
  switch (variant) {
    case lse::AndVariant::gl_lasso: {
      double mu = o.value("weight", o.value("mu", 0.0));
      if (!(mu > 0)) {
        if (!o.contains("sigma")) throw lse::InvalidArgument("lasso needs \"weight\" or \"sigma\"");
        mu = lse::mu_star(obs.sample_set.L(), obs.sample_set.M_bar(), o.at("sigma").get<double>()).mu_star;
      }
      return lse::AndProblem::lasso(obs, mu);
    }
    case lse::AndVariant::gl_sr_lasso:
      return lse::AndProblem::sr_lasso(obs, o.value("weight", 1.0));
    case lse::AndVariant::gl_lad_lasso:
      return lse::AndProblem::lad_lasso(obs, o.value("weight", -1.0));
    case lse::AndVariant::bp_noiseless:
      return lse::AndProblem::basis_pursuit(obs);
  }
  throw lse::InvalidArgument("unknown variant '" + v + "'");
}

}  // namespace

extern "C" {

const char* lse_version(void) { return "0.1.0"; }

const char* lse_last_error(void) { return last_error.c_str(); }

void lse_string_free(char* s) { std::free(s); }

lse_status lse_observation_create(int M, const int* omega, size_t L, const double* re,
                                  const double* im, lse_observation** out) {
  return guarded([&] {
    need_out(out);
    if (L > 0 && (!omega || !re || !im)) throw lse::InvalidArgument("null input array");
    auto h = std::make_unique<lse_observation>();
    h->obs.sample_set = lse::SampleSet(std::vector<int>(omega, omega + L), M);
    h->obs.y.resize(static_cast<Eigen::Index>(L));
    for (size_t i = 0; i < L; ++i) h->obs.y[static_cast<Eigen::Index>(i)] = lse::cplx(re[i], im[i]);
    h->obs.validate();
    *out = h.release();
  });
}

lse_status lse_observation_generate(const char* config_json, uint64_t seed, lse_observation** out) {
  return guarded([&] {
    need_out(out);
    const json c = parse_options(config_json);
    const int M = c.at("M").get<int>();
    lse::Rng rng(seed);
    const lse::LineSpectralModel model = lse::serial::model_from_json(c.at("model"), &rng);
    lse::SamplingSpec spec = c.contains("sampling") ? lse::serial::sampling_from_json(c.at("sampling"))
                                                    : lse::SamplingSpec{lse::sampling::Complete{}};
    const std::uint64_t omega_seed = rng();
    if (auto* r = std::get_if<lse::sampling::Random>(&spec); r && !c.at("sampling").contains("seed"))
      r->seed = omega_seed;
    const lse::SampleSet omega = lse::make_sample_set(M, spec);
    const lse::NoiseSpec noise = c.contains("noise") ? lse::serial::noise_from_json(c.at("noise"), omega.L())
                                                     : lse::NoiseSpec::none();
    auto h = std::make_unique<lse_observation>();
    h->obs = lse::generate_signal(model, noise, omega, rng());
    *out = h.release();
  });
}

lse_status lse_observation_from_json(const char* text, lse_observation** out) {
  return guarded([&] {
    need_out(out);
    auto h = std::make_unique<lse_observation>();
    h->obs = lse::serial::observation_from_json(parse_options(text));
    *out = h.release();
  });
}

lse_status lse_observation_from_csv(const char* csv, int M, lse_observation** out) {
  return guarded([&] {
    need_out(out);
    if (!csv) throw lse::InvalidArgument("csv text is null");
    auto h = std::make_unique<lse_observation>();
    h->obs = lse::io::parse_signal_csv(csv, M);
    *out = h.release();
  });
}

lse_status lse_observation_to_json(const lse_observation* obs, char** out) {
  return guarded([&] {
    need_out(out);
    *out = dup(lse::serial::to_json(get(obs)).dump());
  });
}

lse_status lse_observation_to_csv(const lse_observation* obs, char** out) {
  return guarded([&] {
    need_out(out);
    *out = dup(lse::io::signal_csv(get(obs)));
  });
}

lse_status lse_observation_size(const lse_observation* obs, int* M, int* L) {
  return guarded([&] {
    const lse::Observation& o = get(obs);
    if (M) *M = o.sample_set.M();
    if (L) *L = o.sample_set.L();
  });
}

void lse_observation_free(lse_observation* obs) { delete obs; }

lse_status lse_solve(const lse_observation* obs, const char* options_json, char** out) {
  return guarded([&] {
    need_out(out);
    const lse::Observation& o = get(obs);
    const json opts = parse_options(options_json);
    const lse::AndProblem problem = problem_of(o, opts);
    const lse::SdpSolution sol = lse::solve_and(problem, solver_of(opts));
    json j = {{"variant", lse::to_string(problem.variant)},
              {"weight", problem.weight},
              {"solution", lse::serial::to_json(sol, opts.value("full", false))}};
    try {
      const lse::SpectrumRetrieval r = lse::retrieve_spectrum(sol.u, opts.value("rank_tol", 1e-6));
      j["decomposition"] = lse::serial::to_json(r.decomposition);
      j["shift"] = r.delta;
      j["shifted"] = r.shifted;
    } catch (const lse::DomainError& e) {
      j["decomposition"] = nullptr;
      j["decomposition_error"] = e.what();
    }
    *out = dup(j.dump());
  });
}

lse_status lse_gls(const lse_observation* obs, const char* options_json, char** out) {
  return guarded([&] {
    need_out(out);
    const lse::Observation& o = get(obs);
    const json opts = parse_options(options_json);
    lse::GlsOptions go;
    go.solver = solver_of(opts);
    go.rank_tol = opts.value("rank_tol", go.rank_tol);
    const lse::NoiseAssumption a =
        lse::serial::assumption_from_json(opts.contains("assumption") ? opts.at("assumption") : json("hetero"));
    json j = {{"estimate", lse::serial::to_json(lse::solve_gls(o, a, go), opts.value("full", false))}};
    if (opts.value("equivalence", false)) {
      std::optional<double> s0;
      if (opts.contains("sigma0")) s0 = opts.at("sigma0").get<double>();
      j["equivalence"] = lse::serial::to_json(lse::check_equivalence(o, go, s0));
    }
    *out = dup(j.dump());
  });
}

lse_status lse_postprocess(const lse_observation* obs, const char* options_json, char** out) {
  return guarded([&] {
    need_out(out);
    const lse::Observation& o = get(obs);
    const json opts = parse_options(options_json);
    const lse::MethodSpec m = lse::MethodSpec::parse(opts.value("method", "gls-hetero"));
    if (m.post != lse::MethodSpec::Post::none)
      throw lse::InvalidArgument("postprocess: give the base method without a framework prefix");
    const lse::GridOptions grid =
        opts.contains("grid") ? lse::serial::grid_options_from_json(opts.at("grid")) : lse::GridOptions{};
    const lse::BaseEstimate b = lse::solve_base(m, o, opts.value("sigma", 0.0), solver_of(opts), grid);
    lse::FrameworkOptions fo;
    if (opts.contains("order") && !opts.at("order").is_null()) fo.oracle_order = opts.at("order").get<int>();
    fo.shift_before_sorte = opts.value("shift_before_sorte", false);
    fo.psd_tol = opts.value("psd_tol", fo.psd_tol);
    const lse::FrameworkResult fr = lse::run_framework(b.u, o, b.source, fo);
    json j = {{"method", m.name},
              {"source", b.source},
              {"base", {{"freqs", b.freqs},
                        {"weights", b.weights},
                        {"objective", b.objective},
                        {"iterations", b.iterations},
                        {"converged", b.converged}}},
              {"framework", lse::serial::to_json(fr)}};
    *out = dup(j.dump());
  });
}

lse_status lse_grid(const lse_observation* obs, const char* options_json, char** out) {
  return guarded([&] {
    need_out(out);
    const lse::Observation& o = get(obs);
    const json opts = parse_options(options_json);
    const lse::AndVariant variant = lse::and_variant_from_string(opts.value("variant", "lad"));
    double weight = opts.value("weight", -1.0);
    if (weight <= 0 && variant == lse::AndVariant::gl_sr_lasso) weight = 1.0;
    if (weight <= 0 && variant == lse::AndVariant::gl_lasso)
      throw lse::InvalidArgument("grid lasso needs a positive \"weight\"");
    const lse::GridVariant gv{variant, weight};
    const int N = opts.value("N", 5 * o.sample_set.M());
    const lse::GridOptions grid =
        opts.contains("grid") ? lse::serial::grid_options_from_json(opts.at("grid")) : lse::GridOptions{};
    json j;
    if (opts.value("sandwich", false)) {
      const lse::SandwichReport rep =
          lse::sandwich_check(o, N, gv, opts.value("rel_slack", 1e-4), solver_of(opts), grid);
      j["sandwich"] = lse::serial::to_json(rep);
    }
    const lse::GridDictionary dict = lse::build_dictionary(N, o.sample_set);
    const lse::GridSolution sol = lse::solve_grid_l1nd(gv, dict, o, grid);
    j["solution"] = lse::serial::to_json(sol, dict);
    std::vector<double> peaks;
    for (int k : lse::grid_peaks(sol.s, opts.value("peaks", -1))) peaks.push_back(dict.freqs[k]);
    j["peaks"] = peaks;
    *out = dup(j.dump());
  });
}

lse_status lse_certify(const lse_observation* obs, const char* options_json, char** out) {
  return guarded([&] {
    need_out(out);
    const lse::Observation& o = get(obs);
    const json opts = parse_options(options_json);
    double mu = opts.value("mu", 0.0);
    if (!(mu > 0)) {
      if (!opts.contains("sigma")) throw lse::InvalidArgument("certify needs \"mu\" or \"sigma\"");
      mu = lse::mu_star(o.sample_set.L(), o.sample_set.M_bar(), opts.at("sigma").get<double>()).mu_star;
    }
    const lse::LassoCertificate c =
        lse::certify_lasso(o, mu, solver_of(opts), opts.value("grid_size", 1 << 14),
                           opts.value("dual_tol", 1e-3), opts.value("psd_tol", 1e-8));
    *out = dup(lse::serial::to_json(c).dump());
  });
}

lse_status lse_run_experiment(const char* config_json, const char* out_dir, int* acceptance_passed,
                              char** summary_json) {
  return guarded([&] {
    const lse::ExperimentConfig cfg = lse::experiment_from_json(parse_options(config_json));
    const lse::MetricsTable table = lse::run_experiment(cfg);
    if (out_dir && *out_dir) lse::write_outputs(table, out_dir);
    if (acceptance_passed) *acceptance_passed = table.acceptance_passed() ? 1 : 0;
    if (summary_json) {
      json rows = json::array();
      auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      for (const auto& r : table.summary)
        rows.push_back({{"x", r.x},
                        {"method", r.method},
                        {"n", r.n},
                        {"failures", r.failures},
                        {"mse_mean", num(r.mse_mean)},
                        {"mse_stderr", num(r.mse_stderr)},
                        {"order_rate", num(r.order_rate)},
                        {"resolve_rate", num(r.resolve_rate)},
                        {"converged_rate", num(r.converged_rate)},
                        {"wall_ms_mean", r.wall_ms_mean}});
      json checks = json::array();
      for (const auto& c : table.checks)
        checks.push_back({{"name", c.spec.name},
                          {"acceptance", c.spec.acceptance},
                          {"pass", c.pass},
                          {"detail", c.detail}});
      *summary_json = dup(json{{"scenario", table.scenario},
                               {"summary", rows},
                               {"checks", checks},
                               {"acceptance_passed", table.acceptance_passed()}}
                              .dump());
    }
  });
}

lse_status lse_mu_star(int L, int M_bar, double sigma, double* mu, double* p_star) {
  return guarded([&] {
    const lse::MuStarResult r = lse::mu_star(L, M_bar, sigma);
    if (mu) *mu = r.mu_star;
    if (p_star) *p_star = r.p_star;
  });
}

}  // extern "C"
