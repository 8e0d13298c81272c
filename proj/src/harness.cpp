#include "lse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "lse/io.hpp"

namespace lse {

using serial::json;

int ModelSpec::order() const {
  switch (kind) {
    case Kind::fixed:
      return static_cast<int>(freqs.size());
    case Kind::intervals:
      return static_cast<int>(intervals.size());
    case Kind::random_separated:
      return K;
    case Kind::pair:
      return 2;
  }
  return 0;
}

LineSpectralModel ModelSpec::draw(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> f;
  switch (kind) {
    case Kind::fixed:
      f = freqs;
      break;
    case Kind::intervals:
      for (const auto& [lo, hi] : intervals) f.push_back(lo + (hi - lo) * unit(rng));
      break;
    case Kind::random_separated: {
      bool ok = false;
      for (int attempt = 0; attempt < 100000 && !ok; ++attempt) {
        f.clear();
        for (int k = 0; k < K; ++k) f.push_back(unit(rng));
        ok = true;
        for (int a = 0; a < K && ok; ++a)
          for (int b = a + 1; b < K && ok; ++b) ok = circular_distance(f[a], f[b]) >= min_sep;
      }
      if (!ok) throw InvalidArgument("model: cannot draw frequencies with the requested separation");
      break;
    }
    case Kind::pair: {
      const double f1 = range.first + (range.second - range.first) * unit(rng);
      f = {f1, wrap_frequency(f1 + separation)};
      break;
    }
  }
  std::vector<double> p = powers;
  if (p.size() == 1 && f.size() > 1) p.assign(f.size(), p.front());
  return LineSpectralModel::from_powers(f, p, rng);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

MethodSpec MethodSpec::parse(const std::string& name) {
  MethodSpec m;
  m.name = name;
  std::string rest = name;
  if (rest.rfind("framework-sorte:", 0) == 0) {
    m.post = Post::framework_sorte;
    rest = rest.substr(16);
  } else if (rest.rfind("framework:", 0) == 0) {
    m.post = Post::framework_oracle;
    rest = rest.substr(10);
  }
  if (rest == "ast") {
    m.base = Base::ast;
  } else if (rest == "gls-hetero") {
    m.base = Base::gls_hetero;
  } else if (rest == "gls-homo") {
    m.base = Base::gls_homo;
  } else if (rest == "bp") {
    m.base = Base::bp;
  } else if (rest == "and-lad") {
    m.base = Base::lad;
  } else if (rest == "and-sr") {
    m.base = Base::sr;
  } else if (rest.rfind("grid:", 0) == 0) {
    const auto parts = split(rest, ':');
    if (parts.size() != 3) throw InvalidArgument("method '" + name + "': expected grid:<variant>:<N>");
    m.base = Base::grid;
    m.grid_variant = and_variant_from_string(parts[1]);
    if (m.grid_variant == AndVariant::gl_lasso)
      throw InvalidArgument("method '" + name + "': grid lasso needs a weight; use lad, sr or bp");
    const std::string& n = parts[2];
    try {
      if (!n.empty() && n.back() == 'M')
        m.N = -std::stoi(n.substr(0, n.size() - 1));
      else
        m.N = std::stoi(n);
    } catch (const std::exception&) {
      throw InvalidArgument("method '" + name + "': bad grid size '" + n + "'");
    }
    if (m.N == 0 || (m.N > 0 && m.N < 2))
      throw InvalidArgument("method '" + name + "': grid size must be >= 2");
  } else {
    throw InvalidArgument("unknown method '" + name + "'");
  }
  return m;
}

std::string MethodSpec::base_key() const {
  switch (base) {
    case Base::ast:
      return "ast";
    case Base::gls_hetero:
      return "gls-hetero";
    case Base::gls_homo:
      return "gls-homo";
    case Base::bp:
      return "bp";
    case Base::lad:
      return "and-lad";
    case Base::sr:
      return "and-sr";
    case Base::grid:
      return "grid:" + to_string(grid_variant) + ":" + std::to_string(N);
  }
  return "";
}

int MethodSpec::grid_size(int M) const { return N > 0 ? N : -N * M; }

void ExperimentConfig::validate() const {
  if (M < 2) throw InvalidArgument("experiment: M must be >= 2");
  if (trials < 1) throw InvalidArgument("experiment: trials must be >= 1");
  if (methods.empty()) throw InvalidArgument("experiment: no methods");
  if (model.order() < 1) throw InvalidArgument("experiment: model has no frequencies");
  if (model.powers.size() != 1 && static_cast<int>(model.powers.size()) != model.order())
    throw InvalidArgument("experiment: powers must have one entry or one per frequency");
  if (noise_kind != "none" && noise_kind != "homoscedastic")
    throw InvalidArgument("experiment: noise kind must be none or homoscedastic");
  if (sweep.param != SweepSpec::Param::none && sweep.values.empty())
    throw InvalidArgument("experiment: sweep has no values");
  solver.validate();
  grid.validate();
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  c.scenario = j.value("scenario", c.scenario);
  c.M = j.at("M").get<int>();
  if (j.contains("sampling")) {
    json sj = j.at("sampling");
    c.sample_fraction = sj.value("fraction", 0.0);
    if (c.sample_fraction > 0 && !sj.contains("L")) sj["L"] = std::max(1L, std::lround(c.sample_fraction * c.M));
    c.sampling = serial::sampling_from_json(sj);
  }
  c.resample_omega = j.value("resample_omega", c.resample_omega);

  const json& m = j.at("model");
  const std::string kind = m.value("kind", "fixed");
  if (kind == "fixed") {
    c.model.kind = ModelSpec::Kind::fixed;
    c.model.freqs = m.at("freqs").get<std::vector<double>>();
  } else if (kind == "intervals") {
    c.model.kind = ModelSpec::Kind::intervals;
    for (const auto& iv : m.at("intervals"))
      c.model.intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
  } else if (kind == "random_separated") {
    c.model.kind = ModelSpec::Kind::random_separated;
    c.model.K = m.at("K").get<int>();
    c.model.min_sep = m.value("min_sep", 0.0);
    c.model.min_sep_per_M = m.value("min_sep_per_M", false);
    if (c.model.min_sep_per_M) c.model.min_sep /= c.M;
  } else if (kind == "pair") {
    c.model.kind = ModelSpec::Kind::pair;
    if (m.contains("range")) c.model.range = {m["range"].at(0).get<double>(), m["range"].at(1).get<double>()};
    c.model.separation = m.value("separation", 0.0);
  } else {
    throw InvalidArgument("experiment: unknown model kind '" + kind + "'");
  }
  c.model.powers = m.value("powers", std::vector<double>{1.0});

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    c.noise_kind = n.value("kind", "homoscedastic");
    if (n.contains("sigma"))
      c.sigma = n.at("sigma").get<double>();
    else if (n.contains("snr_db"))
      c.sigma = snr_to_sigma(n.at("snr_db").get<double>());
  } else {
    c.noise_kind = "none";
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    const std::string p = s.value("param", "none");
    if (p == "none")
      c.sweep.param = SweepSpec::Param::none;
    else if (p == "snr_db")
      c.sweep.param = SweepSpec::Param::snr_db;
    else if (p == "sigma")
      c.sweep.param = SweepSpec::Param::sigma;
    else if (p == "separation")
      c.sweep.param = SweepSpec::Param::separation;
    else if (p == "M")
      c.sweep.param = SweepSpec::Param::M;
    else
      throw InvalidArgument("experiment: unknown sweep parameter '" + p + "'");
    c.sweep.values = s.value("values", std::vector<double>{});
    c.sweep.per_M = s.value("per_M", false);
  }

  // Either a name or {"name": ..., "at": [sweep values]}.
  for (const auto& mj : j.at("methods")) {
    if (mj.is_string()) {
      c.methods.push_back(MethodSpec::parse(mj.get<std::string>()));
    } else {
      MethodSpec m = MethodSpec::parse(mj.at("name").get<std::string>());
      m.only_at = mj.value("at", std::vector<double>{});
      c.methods.push_back(std::move(m));
    }
  }
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  if (j.contains("solver")) c.solver = serial::solver_options_from_json(j.at("solver"));
  if (j.contains("grid")) c.grid = serial::grid_options_from_json(j.at("grid"));
  c.shift_before_sorte = j.value("shift_before_sorte", c.shift_before_sorte);
  c.threads = j.value("threads", c.threads);
  c.spectrum_trials = j.value("spectrum_trials", c.spectrum_trials);

  if (j.contains("checks")) {
    for (const auto& cj : j.at("checks")) {
      CheckSpec ck;
      ck.name = cj.value("name", "");
      ck.metric = cj.at("metric").get<std::string>();
      ck.method = cj.at("method").get<std::string>();
      ck.op = cj.value("op", ck.op);
      ck.value = cj.value("value", 0.0);
      ck.slack = cj.value("slack", 0.0);
      ck.at = cj.value("at", std::vector<double>{});
      ck.acceptance = cj.value("acceptance", true);
      if (ck.name.empty()) ck.name = ck.metric + " " + ck.op + " (" + ck.method + ")";
      c.checks.push_back(std::move(ck));
    }
  }
  c.validate();
  return c;
}

std::vector<int> optimal_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  if (n > m) throw InvalidArgument("optimal_assignment: more rows than columns");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) out[p[j] - 1] = j - 1;
  return out;
}

double matched_mse(const std::vector<double>& est, const std::vector<double>& truth,
                   bool* all_within, double radius) {
  const std::size_t K = truth.size();
  if (all_within) *all_within = false;
  if (K == 0) return 0.0;
  std::vector<double> err(K, 0.25);
  if (!est.empty()) {
    if (est.size() >= K) {
      std::vector<std::vector<double>> cost(K, std::vector<double>(est.size()));
      for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = 0; b < est.size(); ++b) cost[a][b] = std::pow(circular_distance(truth[a], est[b]), 2);
      const auto match = optimal_assignment(cost);
      for (std::size_t a = 0; a < K; ++a) err[a] = circular_distance(truth[a], est[match[a]]);
    } else {
      std::vector<std::vector<double>> cost(est.size(), std::vector<double>(K));
      for (std::size_t b = 0; b < est.size(); ++b)
        for (std::size_t a = 0; a < K; ++a) cost[b][a] = std::pow(circular_distance(truth[a], est[b]), 2);
      const auto match = optimal_assignment(cost);
      std::vector<bool> matched(K, false);
      for (std::size_t b = 0; b < est.size(); ++b) {
        err[match[b]] = circular_distance(truth[match[b]], est[b]);
        matched[match[b]] = true;
      }
      for (std::size_t a = 0; a < K; ++a) {
        if (matched[a]) continue;
        double best = 0.5;
        for (double e : est) best = std::min(best, circular_distance(truth[a], e));
        err[a] = best;
      }
    }
  }
  double acc = 0;
  for (double e : err) acc += e * e;
  if (all_within)
    *all_within = est.size() >= K && std::all_of(err.begin(), err.end(), [&](double e) { return e < radius; });
  return acc / static_cast<double>(K);
}

namespace {


double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<SpectrumLine> make_spectrum(const std::vector<double>& f, const std::vector<double>& a) {
  std::vector<SpectrumLine> out;
  for (std::size_t k = 0; k < f.size(); ++k) out.push_back({f[k], a[k]});
  std::sort(out.begin(), out.end(), [](const SpectrumLine& x, const SpectrumLine& y) { return x.f < y.f; });
  return out;
}

}  // namespace

BaseEstimate solve_base(const MethodSpec& m, const Observation& obs, double sigma,
                        const SolverOptions& solver, const GridOptions& grid) {
  BaseEstimate b;
  const auto t0 = std::chrono::steady_clock::now();
  const int M = obs.sample_set.M();
  const int L = obs.sample_set.L();
  auto from_sdp = [&](const SdpSolution& sol) {
    b.u = sol.u;
    b.objective = sol.objective;
    b.iterations = sol.iterations;
    b.converged = sol.converged;
    const SpectrumRetrieval r = retrieve_spectrum(sol.u);
    b.freqs = r.decomposition.freqs;
    b.weights = r.decomposition.powers;
    b.spectrum = make_spectrum(b.freqs, b.weights);
  };
  switch (m.base) {
    case MethodSpec::Base::gls_hetero:
    case MethodSpec::Base::gls_homo: {
      const NoiseAssumption a = m.base == MethodSpec::Base::gls_hetero
                                    ? NoiseAssumption::heteroscedastic()
                                    : NoiseAssumption::homoscedastic();
      GlsOptions go;
      go.solver = solver;
      const GlsEstimate est = solve_gls(obs, a, go);
      b.u = est.u_gls;
      b.objective = est.and_solution.objective;
      b.iterations = est.and_solution.iterations;
      b.converged = est.converged;
      b.freqs = est.freqs;
      b.weights = est.powers;
      const double y_norm = obs.y.norm();
      std::vector<double> scaled = est.powers;
      if (y_norm > 0)
        for (double& p : scaled) p *= std::sqrt(static_cast<double>(L)) / y_norm;
      b.spectrum = make_spectrum(b.freqs, scaled);
      b.source = "gls";
      break;
    }
    case MethodSpec::Base::ast: {
      if (!(sigma > 0)) throw InvalidArgument("ast needs a positive noise variance");
      const double mu = mu_star(L, obs.sample_set.M_bar(), sigma).mu_star;
      from_sdp(solve_and(AndProblem::lasso(obs, mu), solver));
      b.source = "ast";
      break;
    }
    case MethodSpec::Base::bp:
      from_sdp(solve_and(AndProblem::basis_pursuit(obs), solver));
      b.source = "bp";
      break;
    case MethodSpec::Base::lad:
      from_sdp(solve_and(AndProblem::lad_lasso(obs), solver));
      b.source = "and-lad";
      break;
    case MethodSpec::Base::sr:
      from_sdp(solve_and(AndProblem::sr_lasso(obs), solver));
      b.source = "and-sr";
      break;
    case MethodSpec::Base::grid: {
      const GridDictionary dict = build_dictionary(m.grid_size(M), obs.sample_set);
      const double w = m.grid_weight > 0 || m.grid_variant == AndVariant::gl_lad_lasso ? m.grid_weight : 1.0;
      const GridVariant gv{m.grid_variant, w};
      const GridSolution gs = solve_grid_l1nd(gv, dict, obs, grid);
      b.objective = gs.objective;
      b.iterations = gs.iterations;
      b.converged = gs.converged;
      for (int k : grid_peaks(gs.s, -1)) {
        b.freqs.push_back(dict.freqs[k]);
        b.weights.push_back(std::abs(gs.s[k]));
      }
      std::vector<double> sf, sa;
      for (int k : gs.support) {
        sf.push_back(dict.freqs[k]);
        sa.push_back(std::abs(gs.s[k]));
      }
      b.spectrum = make_spectrum(sf, sa);
      // Grid covariance A diag(|s|) A^H over the full index set.
      b.u = ToeplitzParam::from_spectrum(sf, sa, M);
      b.source = "grid";
      break;
    }
  }
  b.wall_ms = elapsed_ms(t0);
  return b;
}

namespace {

std::vector<double> largest(const std::vector<double>& f, const std::vector<double>& w, int K) {
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  std::vector<double> out;
  for (std::size_t k = 0; k < idx.size() && static_cast<int>(out.size()) < K; ++k) out.push_back(f[idx[k]]);
  std::sort(out.begin(), out.end());
  return out;
}

bool same_x(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

double min_separation(const std::vector<double>& f) {
  double best = 0.5;
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b) best = std::min(best, circular_distance(f[a], f[b]));
  return best;
}

struct TrialSetup {
  double x;
  int M;
  double sigma;
  double separation;
};

TrialSetup setup_for(const ExperimentConfig& cfg, double x) {
  TrialSetup s{x, cfg.M, cfg.noise_kind == "none" ? 0.0 : cfg.sigma, cfg.model.separation};
  switch (cfg.sweep.param) {
    case SweepSpec::Param::none:
      break;
    case SweepSpec::Param::snr_db:
      s.sigma = snr_to_sigma(x);
      break;
    case SweepSpec::Param::sigma:
      s.sigma = x;
      break;
    case SweepSpec::Param::separation:
      s.separation = cfg.sweep.per_M ? x / cfg.M : x;
      break;
    case SweepSpec::Param::M:
      s.M = static_cast<int>(std::lround(x));
      break;
  }
  return s;
}

std::vector<MetricsRecord> run_trial(const ExperimentConfig& cfg, int sweep_index, double x,
                                     int trial, const SampleSet* fixed_omega) {
  const TrialSetup st = setup_for(cfg, x);
  Rng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
  ModelSpec ms = cfg.model;
  ms.separation = st.separation;
  if (ms.min_sep_per_M) ms.min_sep = cfg.model.min_sep * cfg.M / st.M;

  std::vector<MetricsRecord> out;
  auto active = [&](const MethodSpec& m) {
    return m.only_at.empty() || std::any_of(m.only_at.begin(), m.only_at.end(),
                                            [&](double v) { return same_x(v, x); });
  };
  auto fail_all = [&](const std::string& what) {
    for (const MethodSpec& m : cfg.methods) {
      if (!active(m)) continue;
      MetricsRecord r;
      r.x = x;
      r.sweep_index = sweep_index;
      r.trial = trial;
      r.method = m.name;
      r.ok = false;
      r.error = what;
      r.K_true = ms.order();
      out.push_back(std::move(r));
    }
  };

  Observation obs;
  try {
    const LineSpectralModel model = ms.draw(rng);
    const std::uint64_t omega_seed = rng();
    const std::uint64_t noise_seed = rng();
    SampleSet omega;
    if (fixed_omega) {
      omega = *fixed_omega;
    } else if (const auto* rs = std::get_if<sampling::Random>(&cfg.sampling)) {
      const int L = cfg.sample_fraction > 0 ? static_cast<int>(std::lround(cfg.sample_fraction * st.M)) : rs->L;
      omega = make_sample_set(st.M, sampling::Random{L, omega_seed});
    } else {
      omega = make_sample_set(st.M, cfg.sampling);
    }
    const NoiseSpec noise = st.sigma > 0 ? NoiseSpec::homoscedastic(st.sigma) : NoiseSpec::none();
    obs = generate_signal(model, noise, omega, noise_seed);
  } catch (const std::exception& e) {
    fail_all(std::string("data generation: ") + e.what());
    return out;
  }

  const std::vector<double> truth = [&] {
    std::vector<double> t = obs.truth->freqs;
    std::sort(t.begin(), t.end());
    return t;
  }();
  const int K = static_cast<int>(truth.size());
  const double radius = K > 1 ? min_separation(truth) / 2.0 : 0.5;

  std::map<std::string, BaseEstimate> bases;
  std::map<std::string, std::string> base_errors;
  for (const MethodSpec& m : cfg.methods) {
    if (!active(m)) continue;
    MetricsRecord r;
    r.x = x;
    r.sweep_index = sweep_index;
    r.trial = trial;
    r.method = m.name;
    r.K_true = K;
    r.truth = truth;
    const std::string key = m.base_key();
    try {
      if (base_errors.count(key)) throw SolverError(base_errors[key]);
      if (!bases.count(key)) {
        try {
          bases.emplace(key, solve_base(m, obs, st.sigma, cfg.solver, cfg.grid));
        } catch (const std::exception& e) {
          base_errors[key] = e.what();
          throw;
        }
      }
      const BaseEstimate& b = bases.at(key);
      r.objective = b.objective;
      r.iterations = b.iterations;
      r.converged = b.converged;
      const auto t0 = std::chrono::steady_clock::now();
      if (m.post == MethodSpec::Post::none) {
        r.freqs = largest(b.freqs, b.weights, K);
        r.spectrum = b.spectrum;
      } else {
        FrameworkOptions fo;
        fo.shift_before_sorte = cfg.shift_before_sorte;
        if (m.post == MethodSpec::Post::framework_oracle) fo.oracle_order = K;
        const FrameworkResult fr = run_framework(b.u, obs, b.source, fo);
        r.K_hat = fr.K_sorte;
        r.order_hit = fr.K_sorte == K;
        r.freqs = fr.freqs;
        std::vector<double> amps;
        for (Eigen::Index k = 0; k < fr.amps.size(); ++k) amps.push_back(std::abs(fr.amps[k]));
        r.spectrum = make_spectrum(fr.freqs, amps);
      }
      r.wall_ms = b.wall_ms + elapsed_ms(t0);
      bool within = false;
      r.mse = matched_mse(r.freqs, truth, &within, radius);
      r.resolved = within;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    if (trial >= cfg.spectrum_trials) r.spectrum.clear();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

MetricsTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> xs = cfg.sweep.param == SweepSpec::Param::none ? std::vector<double>{0.0}
                                                                      : cfg.sweep.values;
  std::optional<SampleSet> fixed_omega;
  if (!cfg.resample_omega || !std::holds_alternative<sampling::Random>(cfg.sampling)) {
    if (cfg.sweep.param != SweepSpec::Param::M) fixed_omega = make_sample_set(cfg.M, cfg.sampling);
  }

  const int jobs = static_cast<int>(xs.size()) * cfg.trials;
  std::vector<std::vector<MetricsRecord>> results(jobs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int job = next++; job < jobs; job = next++) {
      const int si = job / cfg.trials;
      const int t = job % cfg.trials;
      results[job] = run_trial(cfg, si, xs[si], t, fixed_omega ? &*fixed_omega : nullptr);
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(jobs, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MetricsTable table;
  table.scenario = cfg.scenario;
  for (auto& batch : results)
    for (auto& r : batch) table.records.push_back(std::move(r));
  table.summary = summarize(table.records);
  table.checks = evaluate_checks(cfg.checks, table.summary);
  return table;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records) {
  std::map<std::pair<int, std::string>, std::vector<const MetricsRecord*>> groups;
  for (const auto& r : records) groups[{r.sweep_index, r.method}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    SummaryRow row;
    row.x = group.front()->x;
    row.method = key.second;
    std::vector<double> mse;
    int order_n = 0, order_hits = 0, resolved = 0, converged = 0;
    double wall = 0;
    for (const MetricsRecord* r : group) {
      if (!r->ok) {
        ++row.failures;
        continue;
      }
      ++row.n;
      mse.push_back(r->mse);
      if (r->K_hat >= 0) {
        ++order_n;
        order_hits += r->order_hit;
      }
      resolved += r->resolved;
      converged += r->converged;
      wall += r->wall_ms;
    }
    const double total = static_cast<double>(group.size());
    if (row.n > 0) {
      row.mse_mean = std::accumulate(mse.begin(), mse.end(), 0.0) / row.n;
      double var = 0;
      for (double v : mse) var += (v - row.mse_mean) * (v - row.mse_mean);
      row.mse_stderr = row.n > 1 ? std::sqrt(var / (row.n - 1) / row.n) : 0.0;
      row.wall_ms_mean = wall / row.n;
    } else {
      row.mse_mean = std::numeric_limits<double>::quiet_NaN();
    }
    // Failed trials count against the rates.
    row.order_rate = order_n > 0 ? order_hits / (order_n + static_cast<double>(row.failures))
                                 : std::numeric_limits<double>::quiet_NaN();
    row.resolve_rate = resolved / total;
    row.converged_rate = converged / total;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return a.x != b.x ? a.x < b.x : a.method < b.method;
  });
  return rows;
}

namespace {

double metric_of(const SummaryRow& r, const std::string& metric) {
  if (metric == "mse") return r.mse_mean;
  if (metric == "order_rate") return r.order_rate;
  if (metric == "resolve_rate") return r.resolve_rate;
  if (metric == "converged_rate") return r.converged_rate;
  throw InvalidArgument("check: unknown metric '" + metric + "'");
}

bool compare(double v, const std::string& op, double ref) {
  if (op == ">=") return v >= ref;
  if (op == "<=") return v <= ref;
  if (op == ">") return v > ref;
  if (op == "<") return v < ref;
  throw InvalidArgument("check: unknown operator '" + op + "'");
}

}  // namespace

std::vector<CheckResult> evaluate_checks(const std::vector<CheckSpec>& checks,
                                         const std::vector<SummaryRow>& summary) {
  std::vector<CheckResult> out;
  for (const CheckSpec& ck : checks) {
    CheckResult res;
    res.spec = ck;
    std::vector<const SummaryRow*> rows;
    for (const auto& r : summary) {
      if (r.method != ck.method) continue;
      if (!ck.at.empty() &&
          std::none_of(ck.at.begin(), ck.at.end(), [&](double x) { return same_x(x, r.x); }))
        continue;
      rows.push_back(&r);
    }
    if (rows.empty() || (!ck.at.empty() && rows.size() != ck.at.size())) {
      res.detail = "no matching summary rows";
      out.push_back(std::move(res));
      continue;
    }
    res.pass = true;
    std::string detail;
    double prev = -std::numeric_limits<double>::infinity();
    for (const SummaryRow* r : rows) {
      const double v = metric_of(*r, ck.metric);
      bool ok;
      if (ck.op == "nondecreasing") {
        ok = std::isfinite(v) && v >= prev - ck.slack;
        prev = std::max(prev, v);
      } else {
        ok = std::isfinite(v) && compare(v, ck.op, ck.value);
      }
      if (!ok) res.pass = false;
      detail += (detail.empty() ? "" : ", ") + std::string("x=") + io::format_double(r->x) + ": " +
                io::format_double(v) + (ok ? "" : " (fail)");
    }
    res.detail = detail;
    out.push_back(std::move(res));
  }
  return out;
}

bool MetricsTable::acceptance_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return !c.spec.acceptance || c.pass; });
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + io::format_double(v[i]);
  return s;
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string fmt(double v) { return std::isfinite(v) ? io::format_double(v) : "nan"; }

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return out;
}

std::vector<const MetricsRecord*> sorted_records(const std::vector<MetricsRecord>& records) {
  std::vector<const MetricsRecord*> v;
  for (const auto& r : records) v.push_back(&r);
  std::stable_sort(v.begin(), v.end(), [](const MetricsRecord* a, const MetricsRecord* b) {
    if (a->sweep_index != b->sweep_index) return a->sweep_index < b->sweep_index;
    if (a->method != b->method) return a->method < b->method;
    return a->trial < b->trial;
  });
  return v;
}

}  // namespace

std::string records_csv(const std::vector<MetricsRecord>& records) {
  std::string out =
      "x,method,trial,ok,K_true,K_hat,order_hit,mse,resolved,objective,iterations,converged,freqs,error\n";
  for (const MetricsRecord* r : sorted_records(records)) {
    out += fmt(r->x) + ',' + csv_field(r->method) + ',' + std::to_string(r->trial) + ',' +
           (r->ok ? "1" : "0") + ',' + std::to_string(r->K_true) + ',' + std::to_string(r->K_hat) +
           ',' + (r->order_hit ? "1" : "0") + ',' + fmt(r->mse) + ',' + (r->resolved ? "1" : "0") +
           ',' + fmt(r->objective) + ',' + std::to_string(r->iterations) + ',' +
           (r->converged ? "1" : "0") + ',' + join(r->freqs) + ',' + csv_field(r->error) + '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "x,method,n,failures,mse_mean,mse_stderr,order_rate,resolve_rate,converged_rate\n";
  for (const auto& r : rows)
    out += fmt(r.x) + ',' + csv_field(r.method) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.failures) + ',' + fmt(r.mse_mean) + ',' + fmt(r.mse_stderr) + ',' +
           fmt(r.order_rate) + ',' + fmt(r.resolve_rate) + ',' + fmt(r.converged_rate) + '\n';
  return out;
}

std::vector<std::string> emit_plot_data(const MetricsTable& table, PlotKind kind,
                                        const std::string& dir) {
  std::vector<std::string> written;
  if (kind == PlotKind::curve) {
    struct Curve {
      const char* file;
      std::function<std::pair<double, double>(const SummaryRow&)> value;
    };
    auto rate = [](double p, int n) {
      return std::make_pair(p, n > 0 && std::isfinite(p) ? std::sqrt(p * (1 - p) / n) : 0.0);
    };
    const std::vector<Curve> curves = {
        {"curve_mse.csv", [](const SummaryRow& r) { return std::make_pair(r.mse_mean, r.mse_stderr); }},
        {"curve_order_rate.csv", [&](const SummaryRow& r) { return rate(r.order_rate, r.n + r.failures); }},
        {"curve_resolve_rate.csv", [&](const SummaryRow& r) { return rate(r.resolve_rate, r.n + r.failures); }},
    };
    for (const Curve& c : curves) {
      std::string text = "x,method,mean,stderr\n";
      for (const SummaryRow& r : table.summary) {
        const auto [mean, se] = c.value(r);
        if (!std::isfinite(mean)) continue;
        text += fmt(r.x) + ',' + csv_field(r.method) + ',' + fmt(mean) + ',' + fmt(se) + '\n';
      }
      const std::string path = dir + "/" + c.file;
      io::atomic_write(path, text);
      written.push_back(path);
    }
  } else {
    for (const MetricsRecord* r : sorted_records(table.records)) {
      if (r->spectrum.empty()) continue;
      std::string text = "f,amplitude\n";
      for (const SpectrumLine& s : r->spectrum) text += fmt(s.f) + ',' + fmt(s.amplitude) + '\n';
      const std::string path = dir + "/spectrum_" + sanitize(r->method) + "_" +
                               std::to_string(r->sweep_index) + "_" + std::to_string(r->trial) + ".csv";
      io::atomic_write(path, text);
      written.push_back(path);
    }
  }
  return written;
}

std::vector<std::string> write_outputs(const MetricsTable& table, const std::string& dir) {
  std::vector<std::string> written;
  io::atomic_write(dir + "/metrics.csv", records_csv(table.records));
  written.push_back(dir + "/metrics.csv");
  io::atomic_write(dir + "/summary.csv", summary_csv(table.summary));
  written.push_back(dir + "/summary.csv");

  json trials = json::array();
  for (const MetricsRecord* r : sorted_records(table.records)) {
    json j = {{"x", r->x},         {"method", r->method},   {"trial", r->trial},
              {"ok", r->ok},       {"K_true", r->K_true},   {"K_hat", r->K_hat},
              {"order_hit", r->order_hit}, {"freqs", r->freqs}, {"truth", r->truth},
              {"mse", r->mse},     {"resolved", r->resolved}, {"objective", r->objective},
              {"iterations", r->iterations}, {"converged", r->converged}, {"wall_ms", r->wall_ms}};
    if (!r->ok) j["error"] = r->error;
    trials.push_back(std::move(j));
  }
  io::atomic_write(dir + "/trials.json", json{{"scenario", table.scenario}, {"trials", trials}}.dump(1) + "\n");
  written.push_back(dir + "/trials.json");

  json checks = json::array();
  for (const CheckResult& c : table.checks)
    checks.push_back({{"name", c.spec.name},
                      {"metric", c.spec.metric},
                      {"method", c.spec.method},
                      {"op", c.spec.op},
                      {"value", c.spec.value},
                      {"acceptance", c.spec.acceptance},
                      {"pass", c.pass},
                      {"detail", c.detail}});
  io::atomic_write(dir + "/checks.json", checks.dump(1) + "\n");
  written.push_back(dir + "/checks.json");

  for (auto& p : emit_plot_data(table, PlotKind::curve, dir)) written.push_back(std::move(p));
  for (auto& p : emit_plot_data(table, PlotKind::spectrum, dir)) written.push_back(std::move(p));
  return written;
}

}  // namespace lse
