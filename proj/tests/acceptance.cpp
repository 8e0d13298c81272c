// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "lse/harness.hpp"
#include "lse/linalg.hpp"

using namespace lse;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SolverOptions tight_solver() {
  SolverOptions o;
  o.tol_abs = 1e-7;
  o.tol_rel = 1e-7;
  return o;
}

// M = 50, L = 30, f = (0.1, 0.12, 0.5), p = (9, 4, 1), sigma = 0.1.
Observation m50_observation() {
  Rng rng(stream_seed(2, 0));
  const LineSpectralModel m = LineSpectralModel::from_powers({0.1, 0.12, 0.5}, {9, 4, 1}, rng);
  const SampleSet omega = make_sample_set(50, sampling::Random{30, rng()});
  return generate_signal(m, NoiseSpec::homoscedastic(0.1), omega, rng());
}

// M = 100, L = 50, f = (0.103, 0.115, 0.5), p = (4, 4, 1), sigma = 1.
Observation m100_observation(std::uint64_t seed, int trial) {
  Rng rng(stream_seed(seed, trial));
  const LineSpectralModel m = LineSpectralModel::from_powers({0.103, 0.115, 0.5}, {4, 4, 1}, rng);
  const SampleSet omega = make_sample_set(100, sampling::Random{50, rng()});
  return generate_signal(m, NoiseSpec::homoscedastic(1.0), omega, rng());
}

struct CertificateLog {
  int solves = 0;
  int certified = 0;
  double worst_dual = 0;
  double worst_psd = 0;  // lambda_min / lambda_max
  void add(const LassoCertificate& c) {
    if (!c.solution.converged) return;
    ++solves;
    certified += c.dual_ok && c.psd_ok;
    worst_dual = std::max(worst_dual, c.dual_max);
    worst_psd = std::min(worst_psd, c.q_min_eig / c.q_max_eig);
  }
};

CertificateLog certificates;

Outcome exact_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const int M = 50, K = 3, trials = 40;
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::random_separated;
  spec.K = K;
  spec.min_sep = 2.0 / M;
  spec.powers = {1.0};
  int hits = 0, not_converged = 0;
  double worst = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(stream_seed(1, t));
    const LineSpectralModel m = spec.draw(rng);
    const Observation obs = generate_signal(m, NoiseSpec::none(), SampleSet::complete(M), rng());
    const SdpSolution sol = solve_and(AndProblem::basis_pursuit(obs));
    not_converged += !sol.converged;
    const VandermondeResult v = retrieve_spectrum(sol.u).decomposition;
    std::vector<std::pair<double, double>> comps;
    for (std::size_t k = 0; k < v.freqs.size(); ++k) comps.emplace_back(v.powers[k], v.freqs[k]);
    std::sort(comps.rbegin(), comps.rend());
    std::vector<double> est;
    for (std::size_t k = 0; k < comps.size() && est.size() < K; ++k) est.push_back(comps[k].second);
    bool within = false;
    const double mse = matched_mse(est, m.freqs, &within, 1e-4);
    worst = std::max(worst, std::sqrt(mse));
    hits += within;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {hits >= 39 && secs < 60.0,
          fmt("%d/40 trials with every frequency within 1e-4 (need 39), worst RMS error %.1e, %d not converged, "
              "%.1f s (limit 60 s)",
              hits, worst, not_converged, secs)};
}

Outcome equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Observation obs = m50_observation();
  GlsOptions go;
  go.solver = tight_solver();
  const double L = obs.sample_set.L();
  const double y_norm = obs.y.norm();
  bool pass = true;
  std::string detail;
  for (auto [assume, and_problem, label] :
       {std::tuple{NoiseAssumption::heteroscedastic(), AndProblem::lad_lasso(obs), "hetero/LAD"},
        std::tuple{NoiseAssumption::homoscedastic(), AndProblem::sr_lasso(obs), "homo/SR"}}) {
    const GlsEstimate g = solve_gls(obs, assume, go);
    const SdpSolution a = solve_and(and_problem, go.solver);
    const VandermondeResult av = retrieve_spectrum(a.u).decomposition;
    // GLS powers scaled by sqrt(L)/||y|| against AND amplitudes, matched by frequency.
    double amp_gap = 0;
    bool matched = g.freqs.size() == av.freqs.size();
    const double pmax = *std::max_element(av.powers.begin(), av.powers.end());
    for (std::size_t k = 0; matched && k < g.freqs.size(); ++k) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < av.freqs.size(); ++j)
        if (circular_distance(av.freqs[j], g.freqs[k]) < circular_distance(av.freqs[best], g.freqs[k])) best = j;
      if (circular_distance(av.freqs[best], g.freqs[k]) > 1e-6) matched = false;
      const double scaled = g.powers[k] * std::sqrt(L) / y_norm;
      amp_gap = std::max(amp_gap, std::abs(scaled - av.powers[best]) / std::max(av.powers[best], 1e-12 * pmax));
    }
    const EquivalenceCase c = [&] {
      const EquivalenceReport r = check_equivalence(obs, go, std::nullopt);
      return assume.kind == NoiseAssumption::Kind::heteroscedastic ? r.heteroscedastic : r.homoscedastic;
    }();
    const bool ok = matched && amp_gap <= 1e-4 && c.gap < 1e-5 && c.converged;
    pass = pass && ok;
    detail += fmt("%s%s: %zu components, amplitude gap %.2e, objective gap %.2e", detail.empty() ? "" : "; ",
                  label, g.freqs.size(), amp_gap, c.gap);
  }
  // The Lasso member (known variance) feeds the certificate criterion.
  const double sigma0 = 0.1;
  const AndProblem known = gls_equivalent_problem(obs, NoiseAssumption::known_variance(sigma0));
  certificates.add(certify_lasso(obs, known.weight, tight_solver()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {pass && secs < 120.0, detail + fmt("; %.1f s (limit 120 s)", secs)};
}

Outcome mse_bound() {
  const int trials = 40;
  double mse_sum = 0, bound_sum = 0;
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    const Observation obs = m100_observation(3, t);
    const int L = obs.sample_set.L();
    const double mu = mu_star(L, obs.sample_set.M_bar(), 1.0).mu_star;
    const LassoCertificate c = certify_lasso(obs, mu, tight_solver());
    certificates.add(c);
    const VectorXcd clean = steering_matrix(obs.truth->freqs, obs.sample_set) *
                            VectorXcd::Map(obs.truth->amps.data(), obs.truth->amps.size());
    const double mse = (c.solution.z_observed(obs.sample_set) - clean).squaredNorm() / L;
    double s1 = 0;
    for (const cplx& a : obs.truth->amps) s1 += std::abs(a);
    const double bound = mu / L * s1;
    violations += mse > bound;
    mse_sum += mse;
    bound_sum += bound;
  }
  const double mean = mse_sum / trials, bound = bound_sum / trials;
  return {mean <= bound, fmt("mean per-element MSE %.4f vs bound %.4f (%d single-trial violations)", mean, bound,
                             violations)};
}

Outcome mu_bracket() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (int M_bar : {100, 1000, 10000}) {
    const double p = mu_star(M_bar, M_bar, 1.0).p_star;
    const double lo = 2 * std::log(M_bar), hi = 5 * std::log(M_bar);
    pass = pass && p > lo && p < hi;
    detail += fmt("%sM=%d: %.3f in (%.3f, %.3f)", detail.empty() ? "" : ", ", M_bar, p, lo, hi);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {pass && secs < 1.0, detail};
}

Outcome sandwich() {
  int ok = 0, total = 0;
  double worst_upper = -INFINITY;
  std::string failures;
  for (int t = 0; t < 10; ++t) {
    const Observation obs = m100_observation(5, t);
    const GridVariant v = GridVariant::lad_lasso();
    const SdpSolution sdp = solve_and(AndProblem::lad_lasso(obs), tight_solver());
    for (int N : {500, 1000}) {
      GridOptions go;
      const GridDictionary dict = build_dictionary(N, obs.sample_set);
      const GridSolution gs = solve_grid_l1nd(v, dict, obs, go);
      const double lower = (1.0 - M_PI * obs.sample_set.M_bar() / N) * gs.objective;
      const bool pass = lower <= sdp.objective && sdp.objective <= gs.objective * (1 + 1e-4);
      worst_upper = std::max(worst_upper, sdp.objective / gs.objective - 1);
      ++total;
      ok += pass;
      if (!pass)
        failures += fmt(" [trial %d N=%d: grid %.6f gridless %.6f%s]", t, N, gs.objective, sdp.objective,
                        gs.converged && sdp.converged ? "" : " not converged");
    }
  }
  return {ok == total, fmt("%d/%d instances inside the bounds; max gridless/grid - 1 = %.2e", ok, total, worst_upper) +
                           failures};
}

Outcome vandermonde_oracle() {
  Rng rng(6);
  int fails = 0, cases = 0;
  double worst_f = 0, worst_p = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int M : {8, 32, 64}) {
    const int n = M == 8 ? 66 : 67;
    for (int t = 0; t < n; ++t, ++cases) {
      const int K = std::uniform_int_distribution<int>(1, std::min({10, M - 1, M / 2}))(rng);
      std::vector<double> f;
      while (static_cast<int>(f.size()) < K) {
        const double c = unit(rng);
        if (std::all_of(f.begin(), f.end(), [&](double g) { return circular_distance(c, g) >= 1.0 / M; }))
          f.push_back(c);
      }
      std::sort(f.begin(), f.end());
      std::vector<double> p;
      for (int k = 0; k < K; ++k) p.push_back(0.5 + 4.5 * unit(rng));
      try {
        const VandermondeResult v = vandermonde_decompose(ToeplitzParam::from_spectrum(f, p, M));
        if (static_cast<int>(v.freqs.size()) != K) {
          ++fails;
          continue;
        }
        double ef = 0, ep = 0;
        for (int k = 0; k < K; ++k) {
          ef = std::max(ef, circular_distance(v.freqs[k], f[k]));
          ep = std::max(ep, std::abs(v.powers[k] - p[k]) / p[k]);
        }
        worst_f = std::max(worst_f, ef);
        worst_p = std::max(worst_p, ep);
        fails += !(ef < 1e-8 && ep < 1e-6);
      } catch (const Error&) {
        ++fails;
      }
    }
  }
  return {fails == 0 && cases >= 200,
          fmt("%d instances, %d failures; worst freq error %.2e, worst power error %.2e", cases, fails, worst_f, worst_p)};
}

ExperimentConfig snr_sweep_config() {
  ExperimentConfig c;
  c.scenario = "snr_sweep";
  c.M = 100;
  c.sampling = sampling::Random{50, 0};
  c.model.kind = ModelSpec::Kind::intervals;
  c.model.intervals = {{0.102, 0.104}, {0.114, 0.116}, {0.499, 0.501}};
  c.model.powers = {4, 4, 1};
  c.sweep.param = SweepSpec::Param::snr_db;
  c.sweep.values = {0, 4, 10, 20};
  c.methods.push_back(MethodSpec::parse("framework:gls-hetero"));
  MethodSpec grid = MethodSpec::parse("grid:lad:5M");
  grid.only_at = {20};
  c.methods.push_back(grid);
  c.trials = 40;
  c.seed = 4;
  const double N = 500;
  c.checks = {
      {"order", "order_rate", "framework:gls-hetero", ">=", 0.9, 0, {}, true},
      {"grid floor", "mse", "grid:lad:5M", ">=", 0.5 / (12 * N * N), 0, {20}, true},
      {"framework below floor", "mse", "framework:gls-hetero", "<", 1 / (12 * N * N), 0, {20}, true},
  };
  return c;
}

std::optional<MetricsTable> snr_sweep_table;

const MetricsTable& snr_sweep() {
  if (!snr_sweep_table) snr_sweep_table = run_experiment(snr_sweep_config());
  return *snr_sweep_table;
}

const CheckResult& check_named(const MetricsTable& t, const std::string& name) {
  for (const auto& c : t.checks)
    if (c.spec.name == name) return c;
  throw std::runtime_error("missing check " + name);
}

Outcome model_order() {
  const CheckResult& c = check_named(snr_sweep(), "order");
  return {c.pass, "SORTE success rate by SNR: " + c.detail};
}

Outcome framework_mse() {
  const CheckResult& g = check_named(snr_sweep(), "grid floor");
  const CheckResult& f = check_named(snr_sweep(), "framework below floor");
  return {g.pass && f.pass, fmt("floor 1/(12N^2) = %.3e; grid LAD %s (need >= %.3e); GLS+framework %s (need < %.3e)",
                                1 / (12 * 500.0 * 500.0), g.detail.c_str(), g.spec.value, f.detail.c_str(),
                                f.spec.value)};
}

Outcome resolution() {
  ExperimentConfig c;
  c.scenario = "resolution";
  c.M = 100;
  c.sampling = sampling::Random{50, 0};
  c.model.kind = ModelSpec::Kind::pair;
  c.model.range = {0.0, 1.0};
  c.model.powers = {1.0, 1.0};
  c.sigma = snr_to_sigma(10);
  c.sweep.param = SweepSpec::Param::separation;
  c.sweep.per_M = true;
  c.sweep.values = {0.4, 0.6, 0.8, 1.0};
  c.trials = 40;
  c.seed = 7;
  const std::vector<std::string> methods{"gls-hetero", "framework:gls-hetero", "framework-sorte:gls-hetero"};
  for (const auto& m : methods) {
    c.methods.push_back(MethodSpec::parse(m));
    c.checks.push_back({m + " at 1/M", "resolve_rate", m, ">=", 0.95, 0, {1.0}, true});
    c.checks.push_back({m + " trend", "resolve_rate", m, "nondecreasing", 0, 1.0 / 40 + 1e-12, {}, true});
  }
  const MetricsTable t = run_experiment(c);
  std::string detail;
  for (const auto& m : methods) {
    const CheckResult& trend = check_named(t, m + " trend");
    const CheckResult& top = check_named(t, m + " at 1/M");
    detail += fmt("%s%s: %s%s%s", detail.empty() ? "" : "; ", m.c_str(), trend.detail.c_str(),
                  top.pass ? "" : " (below 0.95 at 1/M)", trend.pass ? "" : " (not monotone)");
  }
  return {t.acceptance_passed(), detail};
}

Outcome solver_certificates() {
  if (certificates.solves == 0) return {false, "no GL-Lasso solves recorded (run criteria 2 and 3 first)"};
  return {certificates.certified == certificates.solves,
          fmt("%d/%d converged GL-Lasso solves certified; max dual polynomial %.6f (limit 1.001), "
              "min lambda_min/lambda_max of Q %.2e (limit -1e-8)",
              certificates.certified, certificates.solves, certificates.worst_dual, certificates.worst_psd)};
}

// Property suites, 100+ randomized cases each.
Outcome properties() {
  Rng rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto herm = [&](int n) {
    MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = {g(rng), g(rng)};
    return MatrixXcd((A + A.adjoint()) / 2.0);
  };
  auto cvec = [&](int n) {
    VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
    return v;
  };
  int fails[5] = {0, 0, 0, 0, 0};
  const int cases = 120;
  for (int t = 0; t < cases; ++t) {
    const int M = 2 + t % 20;
    // adjoint identity
    VectorXcd uv = cvec(M);
    uv[0] = uv[0].real();
    const MatrixXcd W = herm(M);
    const double lhs = (toeplitz_from_u(ToeplitzParam(uv)).adjoint() * W).trace().real();
    const double rhs = uv.dot(toeplitz_adjoint(W)).real();
    fails[0] += std::abs(lhs - rhs) > 1e-9 * (1 + std::abs(lhs));
    // psd_project idempotence
    const MatrixXcd P = psd_project(herm(M));
    fails[1] += (psd_project(P) - P).norm() > 1e-9 * (1 + P.norm());
    // gls objective against the Schur-complement bisection
    const int L = 1 + t % M;
    const SampleSet omega = make_sample_set(M, sampling::Random{L, rng()});
    const ToeplitzParam u = ToeplitzParam::from_spectrum({unit(rng), unit(rng)}, {1 + unit(rng), unit(rng)}, M);
    VectorXd sigma(L);
    for (int j = 0; j < L; ++j) sigma[j] = 0.05 + unit(rng);
    Observation obs;
    obs.sample_set = omega;
    obs.y = cvec(L);
    const MatrixXcd T = toeplitz_from_u(u);
    const auto pos = omega.zero_based();
    MatrixXcd R(L, L);
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) R(a, b) = T(pos[a], pos[b]);
    R.diagonal() += sigma.cast<cplx>();
    auto feasible = [&](double s) {
      MatrixXcd B(L + 1, L + 1);
      B(0, 0) = s;
      B.block(1, 0, L, 1) = obs.y;
      B.block(0, 1, 1, L) = obs.y.adjoint();
      B.bottomRightCorner(L, L) = R;
      return Eigen::SelfAdjointEigenSolver<MatrixXcd>(B, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() >= 0;
    };
    double lo = 0, hi = 1;
    while (!feasible(hi)) hi *= 2;
    for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) (feasible(0.5 * (lo + hi)) ? hi : lo) = 0.5 * (lo + hi);
    const double expect = R.trace().real() + obs.y.squaredNorm() * hi;
    const double got = gls_objective(u, sigma, obs).value;
    fails[2] += std::abs(got - expect) > 1e-8 * expect;
    // SORTE scale invariance
    const int n = 4 + t % 20;
    std::vector<double> lam;
    for (int i = 0; i < n; ++i) lam.push_back(i < 1 + t % (n - 3) ? 10 + 50 * unit(rng) : 1 + unit(rng));
    std::sort(lam.rbegin(), lam.rend());
    std::vector<double> scaled = lam;
    const double c = std::pow(10.0, -6 + 12 * unit(rng));
    for (double& v : scaled) v *= c;
    fails[3] += sorte(lam).K != sorte(scaled).K;
    // steering-vector norm
    const double f = unit(rng);
    fails[4] += std::abs(steering_vector(f, omega).norm() - std::sqrt(static_cast<double>(L))) > 1e-12 * std::sqrt(L);
  }
  const int total = fails[0] + fails[1] + fails[2] + fails[3] + fails[4];
  return {total == 0, fmt("%d cases each; failures: adjoint %d, psd idempotence %d, Schur oracle %d, "
                          "SORTE scaling %d, steering norm %d",
                          cases, fails[0], fails[1], fails[2], fails[3], fails[4])};
}

}  // namespace

// Usage: lse_acceptance [--known-fail=N,...] [criterion ...]
// A known failure still prints FAIL but does not set the exit status.
int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--known-fail=", 0) == 0) {
      std::stringstream ss(a.substr(13));
      for (std::string item; std::getline(ss, item, ',');) known.insert(std::stoi(item));
    } else {
      only.insert(std::stoi(a));
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"noiseless exact recovery", exact_recovery},
      {"GLS/AND equivalence", equivalence},
      {"AST MSE bound", mse_bound},
      {"mu* bracketing", mu_bracket},
      {"grid/gridless sandwich", sandwich},
      {"Vandermonde oracle", vandermonde_oracle},
      {"model order via SORTE", model_order},
      {"framework MSE vs grid floor", framework_mse},
      {"two-frequency resolution", resolution},
      {"solver certificates", solver_certificates},
      {"property suites", properties},
  };
  int failed = 0, unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool expected = known.count(id) > 0;
    std::printf("%s %2d %s: %s [%.1f s]%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), secs,
                expected ? (o.pass ? " (listed as a known failure)" : " (known failure)") : "");
    std::fflush(stdout);
    failed += !o.pass;
    unexpected += !o.pass && !expected;
  }
  std::printf("%d criteria failed (%d unexpected)\n", failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
