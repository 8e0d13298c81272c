#include "lse/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lse/linalg.hpp"

namespace lse {

ToeplitzParam::ToeplitzParam(VectorXcd u, double tol) : u_(std::move(u)) {
  if (u_.size() == 0) return;
  const double scale = std::max(u_.cwiseAbs().maxCoeff(), 1.0);
  if (std::abs(u_[0].imag()) > tol * scale)
    throw DomainError("ToeplitzParam: u_1 must be real");
  u_[0] = u_[0].real();
}

ToeplitzParam ToeplitzParam::from_spectrum(const std::vector<double>& freqs,
                                           const std::vector<double>& powers, int M) {
  if (freqs.size() != powers.size()) throw InvalidArgument("from_spectrum: size mismatch");
  VectorXcd u = VectorXcd::Zero(M);
  for (std::size_t k = 0; k < freqs.size(); ++k)
    for (int m = 0; m < M; ++m) u[m] += powers[k] * std::polar(1.0, -kTwoPi * freqs[k] * m);
  u[0] = u[0].real();
  return ToeplitzParam(std::move(u));
}

MatrixXcd toeplitz_from_u(const ToeplitzParam& param) {
  const VectorXcd& u = param.values();
  const Eigen::Index M = u.size();
  MatrixXcd T(M, M);
  for (Eigen::Index j = 0; j < M; ++j) {
    T(j, j) = u[0].real();
    for (Eigen::Index k = j + 1; k < M; ++k) {
      T(j, k) = u[k - j];
      T(k, j) = std::conj(u[k - j]);
    }
  }
  return T;
}

VectorXcd toeplitz_adjoint(const MatrixXcd& W, double tol) {
  const Eigen::Index M = W.rows();
  if (W.cols() != M) throw InvalidArgument("toeplitz_adjoint: matrix must be square");
  if (M > 0 && hermitian_defect(W) > tol)
    throw DomainError("toeplitz_adjoint: input is not Hermitian");
  VectorXcd out(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    cplx upper = 0, lower = 0;
    for (Eigen::Index j = 0; j + m < M; ++j) {
      upper += W(j, j + m);
      lower += W(j + m, j);
    }
    out[m] = m == 0 ? cplx(upper.real()) : upper + std::conj(lower);
  }
  return out;
}

MatrixXcd psd_project(const MatrixXcd& H, int* positive_count) {
  const MatrixXcd S = 0.5 * (H + H.adjoint());
  const Eigen::Index n = S.rows();
  // Partial spectra pay off only when one side of the spectrum is small.
  const int hint = positive_count ? *positive_count : -1;
  const Eigen::Index small = std::max<Eigen::Index>(n / 8, 1);
  MatrixXcd out;
  int count = 0;
  if (hint >= 0 && hint <= small) {
    const HermitianEigen es = eigh_above(S, 0.0);
    count = static_cast<int>(es.values.size());
    out = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
  } else if (hint >= 0 && n - hint <= small) {
    const HermitianEigen es = eigh_above(-S, 0.0);
    count = static_cast<int>(n - es.values.size());
    out = S + es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
  } else {
    const HermitianEigen es = eigh(S);
    Eigen::Index first = 0;
    while (first < n && es.values[first] <= 0) ++first;
    count = static_cast<int>(n - first);
    const auto V = es.vectors.rightCols(count);
    out = V * es.values.tail(count).asDiagonal() * V.adjoint();
  }
  if (positive_count) *positive_count = count;
  return out;
}

int toeplitz_rank(const ToeplitzParam& u, double rank_tol) {
  if (u.size() == 0) return 0;
  const VectorXd ev = eigvalsh(toeplitz_from_u(u));
  const double lmax = ev.maxCoeff();
  if (lmax <= 0) return 0;
  return static_cast<int>((ev.array() > rank_tol * lmax).count());
}

namespace {

// b_m for m = -(M-1)..(M-1), stored at offset m + M - 1.
VectorXcd moment_sequence(const VectorXcd& u) {
  const Eigen::Index M = u.size();
  VectorXcd b(2 * M - 1);
  for (Eigen::Index j = 0; j < M; ++j) {
    b[M - 1 + j] = u[j];
    b[M - 1 - j] = std::conj(u[j]);
  }
  b[M - 1] = u[0].real();
  return b;
}

// Collapse roots whose angular distance is below `tol` radians.
std::vector<double> merge_close(std::vector<double> freqs, double tol) {
  if (freqs.empty()) return freqs;
  std::sort(freqs.begin(), freqs.end());
  std::vector<double> out{freqs.front()};
  for (std::size_t k = 1; k < freqs.size(); ++k)
    if (kTwoPi * (freqs[k] - out.back()) >= tol) out.push_back(freqs[k]);
  if (out.size() > 1 && kTwoPi * circular_distance(out.front(), out.back()) < tol) out.pop_back();
  return out;
}

}  // namespace

VandermondeResult vandermonde_decompose(const ToeplitzParam& param, double rank_tol) {
  VandermondeResult res;
  const int M = param.size();
  if (M == 0) return res;
  const VectorXcd& u = param.values();
  const MatrixXcd T = toeplitz_from_u(param);
  const VectorXd ev = eigvalsh(T);
  const double lmax = ev.maxCoeff();
  if (lmax <= 0) {
    if (T.norm() == 0) return res;
    throw DomainError("vandermonde_decompose: T(u) is not positive semidefinite");
  }
  if (ev.minCoeff() < -rank_tol * lmax)
    throw DomainError("vandermonde_decompose: T(u) is indefinite beyond tolerance");
  const int r = static_cast<int>((ev.array() > rank_tol * lmax).count());
  res.rank = r;
  if (r >= M)
    throw DomainError("vandermonde_decompose: T(u) has full rank; apply min_eig_shift first");

  // Annihilating filter: sum_{k=0}^{r} h_k b_{m-k} = 0, h_0 = 1, over every window.
  const VectorXcd b = moment_sequence(u);
  const int n_eq = 2 * M - 1 - r;
  MatrixXcd B(n_eq, r);
  VectorXcd rhs(n_eq);
  for (int i = 0; i < n_eq; ++i) {
    const int m = i + r;  // offset index of b_m
    rhs[i] = -b[m];
    for (int k = 1; k <= r; ++k) B(i, k - 1) = b[m - k];
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(B);
  if (cod.rank() < r) res.ill_conditioned = true;
  const VectorXcd h = cod.solve(rhs);

  std::vector<cplx> coeffs(r + 1);
  coeffs[0] = 1.0;
  for (int k = 1; k <= r; ++k) coeffs[k] = h[k - 1];
  std::vector<double> freqs;
  freqs.reserve(r);
  for (cplx theta : polynomial_roots(coeffs))
    freqs.push_back(wrap_frequency(-std::arg(theta) / kTwoPi));
  freqs = merge_close(std::move(freqs), 1e-9);

  // Powers from b_m = sum_k p_k theta_k^m over all 2M-1 moments.
  const int K = static_cast<int>(freqs.size());
  MatrixXd V(2 * (2 * M - 1), K);
  VectorXd rhs_re(2 * (2 * M - 1));
  for (int i = 0; i < 2 * M - 1; ++i) {
    const int m = i - (M - 1);
    rhs_re[2 * i] = b[i].real();
    rhs_re[2 * i + 1] = b[i].imag();
    for (int k = 0; k < K; ++k) {
      const cplx t = std::polar(1.0, -kTwoPi * freqs[k] * m);
      V(2 * i, k) = t.real();
      V(2 * i + 1, k) = t.imag();
    }
  }
  const VectorXd p = nnls(V, rhs_re);
  for (int k = 0; k < K; ++k)
    if (p[k] > 0) {
      res.freqs.push_back(freqs[k]);
      res.powers.push_back(p[k]);
    }

  const MatrixXcd A = [&] {
    MatrixXcd a(M, static_cast<Eigen::Index>(res.freqs.size()));
    for (std::size_t k = 0; k < res.freqs.size(); ++k) a.col(k) = full_steering_vector(res.freqs[k], M);
    return a;
  }();
  const VectorXd pv = Eigen::Map<const VectorXd>(res.powers.data(), res.powers.size());
  res.residual = (T - A * pv.asDiagonal() * A.adjoint()).norm();
  if (res.residual > 1e-6 * T.norm()) res.ill_conditioned = true;
  return res;
}

EigShift min_eig_shift(const ToeplitzParam& u) {
  EigShift out;
  if (u.size() == 0) return out;
  out.delta = eigvalsh(toeplitz_from_u(u)).minCoeff();
  VectorXcd v = u.values();
  v[0] -= out.delta;
  out.u = ToeplitzParam(std::move(v));
  return out;
}

SpectrumRetrieval retrieve_spectrum(const ToeplitzParam& u, double rank_tol) {
  SpectrumRetrieval out;
  if (u.size() == 0) return out;
  const VectorXd ev = eigvalsh(toeplitz_from_u(u));
  const double lmax = ev.maxCoeff();
  if (lmax <= 0) return out;
  const int rank = static_cast<int>((ev.array() > rank_tol * lmax).count());
  ToeplitzParam target = u;
  if (rank == u.size() || ev.minCoeff() < -rank_tol * lmax) {
    out.delta = ev.minCoeff();
    VectorXcd v = u.values();
    v[0] -= out.delta;
    target = ToeplitzParam(std::move(v));
    out.shifted = true;
  }
  out.decomposition = vandermonde_decompose(target, rank_tol);
  return out;
}

}  // namespace lse
