#pragma once

#include <optional>
#include <string>

#include "lse/solver.hpp"

namespace lse {

struct NoiseAssumption {
  enum class Kind { heteroscedastic, homoscedastic, known_variance };
  /// How the known-variance case sets the Lasso weight.
  enum class KnownWeight {
    scaled,  // sqrt(L) * sigma0 / ||y||, the exact equivalent of GLS
    sqrt,    // sqrt(L) * sigma0^(1/2)
  };

  Kind kind = Kind::heteroscedastic;
  double sigma0 = 0.0;
  KnownWeight known_weight = KnownWeight::scaled;

  static NoiseAssumption heteroscedastic() { return {}; }
  static NoiseAssumption homoscedastic() { return {Kind::homoscedastic, 0.0, KnownWeight::scaled}; }
  static NoiseAssumption known_variance(double sigma0, KnownWeight w = KnownWeight::scaled) {
    return {Kind::known_variance, sigma0, w};
  }
  void validate() const;
};

std::string to_string(NoiseAssumption::Kind k);
NoiseAssumption::Kind noise_kind_from_string(const std::string& s);

/// The AND problem GLS reduces to under `assumption`.
AndProblem gls_equivalent_problem(const Observation& obs, const NoiseAssumption& assumption);

struct GlsOptions {
  SolverOptions solver;
  double rank_tol = kDefaultRankTol;
};

struct GlsEstimate {
  NoiseAssumption assumption;
  /// (||y|| / sqrt(L)) u of the AND solution.
  ToeplitzParam u_gls;
  std::vector<double> freqs;
  std::vector<double> powers;
  /// sigma* from the AND residual, one entry per observed sample.
  VectorXd sigma_star;
  /// sigma* + delta, clamped at zero.
  VectorXd sigma_hat;
  /// Shift removed from u_gls before the Vandermonde decomposition (0 when not shifted).
  double delta = 0.0;
  bool shifted = false;
  /// Rank of the (shifted) T(u_gls) used by the decomposition.
  int K_raw = 0;
  bool ill_conditioned = false;
  SdpSolution and_solution;
  bool converged = false;
  std::string note;
};

/// Solves GLS through its AND equivalent and retrieves (f, p, sigma).
GlsEstimate solve_gls(const Observation& obs, const NoiseAssumption& assumption,
                      const GlsOptions& opts = {});

struct EquivalenceCase {
  bool evaluated = false;
  double gls_objective = 0.0;
  double and_optimum = 0.0;
  /// GLS objective predicted from the AND optimum.
  double predicted = 0.0;
  double gap = 0.0;
  bool converged = false;
};

struct EquivalenceReport {
  EquivalenceCase heteroscedastic;
  EquivalenceCase homoscedastic;
  /// Only evaluated when a noise variance is supplied.
  EquivalenceCase known_variance;
  double sigma0 = 0.0;
};

/// Solves the three AND problems and compares the GLS objective at the reconstructed
/// (u, sigma) against the closed-form identities.
EquivalenceReport check_equivalence(const Observation& obs, const GlsOptions& opts = {},
                                    std::optional<double> sigma0 = std::nullopt);

}  // namespace lse
