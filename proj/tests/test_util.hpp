#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "lse/core.hpp"

namespace testutil {

inline std::vector<double> separated_freqs(lse::Rng& rng, int K, double sep) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    std::vector<double> f;
    for (int k = 0; k < K; ++k) f.push_back(u(rng));
    bool ok = true;
    for (int a = 0; a < K && ok; ++a)
      for (int b = a + 1; b < K && ok; ++b) ok = lse::circular_distance(f[a], f[b]) >= sep;
    if (ok) {
      std::sort(f.begin(), f.end());
      return f;
    }
  }
}

inline lse::MatrixXcd random_hermitian(lse::Rng& rng, int n) {
  std::normal_distribution<double> g;
  lse::MatrixXcd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = {g(rng), g(rng)};
  return (A + A.adjoint()) / 2.0;
}

inline lse::VectorXcd random_complex(lse::Rng& rng, int n) {
  std::normal_distribution<double> g;
  lse::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v;
}

inline lse::SampleSet random_omega(lse::Rng& rng, int M, int L) {
  return lse::make_sample_set(M, lse::sampling::Random{L, rng()});
}

}  // namespace testutil
