#include "lse/postprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lse/linalg.hpp"

namespace lse {

CovarianceEstimate clean_covariance(const ToeplitzParam& u, const SampleSet& omega,
                                    std::string source, double psd_tol) {
  if (u.size() != omega.M()) throw InvalidArgument("clean_covariance: u length must equal M");
  const MatrixXcd T = toeplitz_from_u(u);
  const VectorXd full_ev = eigvalsh(T);
  if (full_ev.size() > 0 && full_ev.minCoeff() < -psd_tol * std::max(full_ev.maxCoeff(), 0.0))
    throw DomainError("clean_covariance: T(u) is not positive semidefinite");

  CovarianceEstimate cov;
  cov.source = std::move(source);
  cov.full = u;
  const std::vector<int> pos = omega.zero_based();
  const int L = omega.L();
  cov.matrix.resize(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) cov.matrix(a, b) = T(pos[a], pos[b]);
  const VectorXd ev = eigvalsh(cov.matrix);
  cov.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::reverse(cov.eigenvalues.begin(), cov.eigenvalues.end());
  return cov;
}

SorteResult sorte(const std::vector<double>& lambda) {
  const int n = static_cast<int>(lambda.size());
  if (n < 4)
    throw InvalidArgument("sorte: need at least 4 eigenvalues; use a threshold rule instead");
  for (int k = 0; k + 1 < n; ++k)
    if (lambda[k] < lambda[k + 1]) throw InvalidArgument("sorte: eigenvalues must be descending");

  std::vector<double> gaps(n - 1);
  for (int k = 0; k + 1 < n; ++k) gaps[k] = lambda[k] - lambda[k + 1];
  // var[k] = sample variance of gaps[k..n-2], k = 0..n-2 (zero for a single gap).
  std::vector<double> var(n - 1);
  for (int k = 0; k < n - 1; ++k) {
    const int cnt = n - 1 - k;
    double mean = 0;
    for (int j = k; j < n - 1; ++j) mean += gaps[j];
    mean /= cnt;
    double acc = 0;
    for (int j = k; j < n - 1; ++j) acc += (gaps[j] - mean) * (gaps[j] - mean);
    var[k] = cnt > 1 ? acc / (cnt - 1) : 0.0;
  }

  SorteResult res;
  const double scale = std::max(std::abs(lambda.front()), std::numeric_limits<double>::min());
  const double zero = 1e-28 * scale * scale;
  res.degenerate = std::all_of(var.begin(), var.end(), [&](double v) { return v <= zero; });
  double best = std::numeric_limits<double>::infinity();
  res.K = 1;
  for (int k = 1; k <= n - 3; ++k) {
    const double s = var[k - 1] > zero ? var[k] / var[k - 1] : std::numeric_limits<double>::infinity();
    res.statistic.push_back(s);
    if (s < best) {
      best = s;
      res.K = k;
    }
  }
  return res;
}

namespace {

// D(f) = a(f)^H C a(f) = sum_l d_l exp(i 2 pi f l) and its first two derivatives.
struct NoiseSpectrum {
  std::vector<cplx> d;  // d_l at offset l + M - 1
  int M;

  std::array<double, 3> eval(double f) const {
    std::array<double, 3> out{0, 0, 0};
    for (int i = 0; i < static_cast<int>(d.size()); ++i) {
      const int l = i - (M - 1);
      const cplx t = d[i] * std::polar(1.0, kTwoPi * f * l);
      const double w = kTwoPi * l;
      out[0] += t.real();
      out[1] += -w * t.imag();
      out[2] += -w * w * t.real();
    }
    return out;
  }
};

// Newton on D'(f) = 0 started from a root-MUSIC estimate; kept only if it lowers D(f).
double polish(const NoiseSpectrum& ns, double f0) {
  const double d0 = ns.eval(f0)[0];
  double f = f0;
  for (int it = 0; it < 30; ++it) {
    const auto v = ns.eval(f);
    if (!(v[2] > 0)) return f0;
    const double step = v[1] / v[2];
    if (std::abs(step) > 0.25 / ns.M) return f0;
    f -= step;
    if (std::abs(step) < 1e-15) break;
  }
  f = wrap_frequency(f);
  return ns.eval(f)[0] <= d0 ? f : f0;
}

}  // namespace

std::vector<double> root_music(const ToeplitzParam& u, int K) {
  const int M = u.size();
  if (K < 1 || K >= M) throw InvalidArgument("music: need 1 <= K < M");
  const HermitianEigen es = eigh(toeplitz_from_u(u));
  const MatrixXcd En = es.vectors.leftCols(M - K);
  const MatrixXcd C = En * En.adjoint();

  NoiseSpectrum ns{std::vector<cplx>(2 * M - 1, 0.0), M};
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k) ns.d[k - j + M - 1] += C(j, k);

  // z^(M-1) sum_l d_l z^l, highest power first; drop vanishing leading terms.
  std::vector<cplx> coeffs(ns.d.rbegin(), ns.d.rend());
  double cmax = 0;
  for (const cplx& c : coeffs) cmax = std::max(cmax, std::abs(c));
  std::size_t lead = 0;
  while (lead + 1 < coeffs.size() && std::abs(coeffs[lead]) <= 1e-14 * cmax) ++lead;
  coeffs.erase(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(lead));
  std::vector<cplx> roots = polynomial_roots(coeffs);

  // Reflect into the closed unit disc; roots come in conjugate-reciprocal pairs, so each
  // spectral line shows up twice and duplicates are skipped by angle.
  for (cplx& z : roots)
    if (std::abs(z) > 1.0) z = 1.0 / std::conj(z);
  std::sort(roots.begin(), roots.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });

  std::vector<double> freqs;
  std::vector<double> radius;
  for (const cplx& z : roots) {
    if (static_cast<int>(freqs.size()) == K) break;
    const double f = wrap_frequency(std::arg(z) / kTwoPi);
    const bool dup = std::any_of(freqs.begin(), freqs.end(), [&](double g) {
      return kTwoPi * circular_distance(f, g) < 1e-5;
    });
    if (dup) continue;
    freqs.push_back(f);
    radius.push_back(std::abs(z));
  }
  if (static_cast<int>(freqs.size()) < K)
    throw SolverError("music: fewer distinct roots than the requested order");
  for (std::size_t k = 0; k < freqs.size(); ++k)
    if (1.0 - radius[k] < 1e-3) freqs[k] = polish(ns, freqs[k]);
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

std::vector<double> music(const CovarianceEstimate& cov, int K) {
  if (cov.full.size() == 0) throw InvalidArgument("music: covariance carries no full T(u)");
  return root_music(cov.full, K);
}

AmplitudeFit refit_amplitudes(const Observation& obs, const std::vector<double>& freqs) {
  obs.validate();
  AmplitudeFit fit;
  if (freqs.empty()) return fit;
  const MatrixXcd A = steering_matrix(freqs, obs.sample_set);
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(A);
  fit.amps = cod.solve(obs.y);
  if (cod.rank() < static_cast<Eigen::Index>(freqs.size())) {
    fit.rank_deficient = true;
    fit.warning = "steering matrix is rank deficient; returned the minimum-norm solution";
  }
  return fit;
}

FrameworkResult run_framework(const ToeplitzParam& u, const Observation& obs,
                              const std::string& source, const FrameworkOptions& opts) {
  const CovarianceEstimate cov = clean_covariance(u, obs.sample_set, source, opts.psd_tol);
  FrameworkResult out;
  out.eigenvalues = cov.eigenvalues;
  if (opts.shift_before_sorte) {
    const double delta = eigvalsh(toeplitz_from_u(u)).minCoeff();
    for (double& v : out.eigenvalues) v -= delta;
  }
  const SorteResult sr = sorte(out.eigenvalues);
  out.K_sorte = sr.K;
  out.sorte_degenerate = sr.degenerate;
  out.K_used = std::min(opts.oracle_order.value_or(sr.K), u.size() - 1);
  out.freqs = music(cov, out.K_used);
  const AmplitudeFit fit = refit_amplitudes(obs, out.freqs);
  out.amps = fit.amps;
  out.rank_deficient = fit.rank_deficient;
  return out;
}

}  // namespace lse
