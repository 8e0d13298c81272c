#pragma once

#include <cmath>

#include "lse/core.hpp"

namespace lse::prox {

/// Complex soft threshold: w * max(1 - t/|w|, 0).
inline cplx soft(cplx w, double t) {
  const double a = std::abs(w);
  return a <= t ? cplx(0.0) : w * (1.0 - t / a);
}

/// Entrywise complex soft threshold (prox of t * ||.||_1).
template <typename Derived>
VectorXcd soft(const Eigen::MatrixBase<Derived>& w, double t) {
  VectorXcd out(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) out[j] = soft(w[j], t);
  return out;
}

/// Block shrinkage (prox of t * ||.||_2).
template <typename Derived>
VectorXcd block_shrink(const Eigen::MatrixBase<Derived>& w, double t) {
  const double n = w.norm();
  if (n <= t) return VectorXcd::Zero(w.size());
  return w * (1.0 - t / n);
}

/// Prox of (t/2) ||.||^2: w / (1 + t).
template <typename Derived>
VectorXcd shrink_l2sq(const Eigen::MatrixBase<Derived>& w, double t) {
  return w / (1.0 + t);
}

/// Data-fit term g(r) of the denoising family.
enum class Fit {
  squared,   // (1/2) ||r||_2^2
  l2,        // ||r||_2
  l1,        // ||r||_1
  exact,     // indicator of r = 0
};

/// argmin_r g(r) + (rho/2) ||r - d||^2
inline VectorXcd residual_prox(Fit fit, const VectorXcd& d, double rho) {
  switch (fit) {
    case Fit::squared:
      return d * (rho / (1.0 + rho));
    case Fit::l2:
      return block_shrink(d, 1.0 / rho);
    case Fit::l1:
      return soft(d, 1.0 / rho);
    case Fit::exact:
      return VectorXcd::Zero(d.size());
  }
  return d;
}

/// g(r); `exact` evaluates to 0 (feasibility is the caller's concern).
inline double fit_value(Fit fit, const VectorXcd& r) {
  switch (fit) {
    case Fit::squared:
      return 0.5 * r.squaredNorm();
    case Fit::l2:
      return r.norm();
    case Fit::l1:
      return r.cwiseAbs().sum();
    case Fit::exact:
      return 0.0;
  }
  return 0.0;
}

}  // namespace lse::prox
