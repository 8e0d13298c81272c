#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lse/error.hpp"

namespace lse {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Random engine used throughout. Streams are derived with `stream_seed`
/// so that trial k of a Monte-Carlo run is reproducible on its own.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (seed, stream).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Observed index set Omega (1-based, strictly increasing) within [1, M].
class SampleSet {
 public:
  SampleSet() = default;

  /// Validates: strictly increasing, within [1, M], nonempty unless M == 0.
  SampleSet(std::vector<int> omega, int M);

  static SampleSet complete(int M);

  const std::vector<int>& omega() const { return omega_; }
  int M() const { return M_; }
  int L() const { return static_cast<int>(omega_.size()); }
  /// Range Omega_L - Omega_1 + 1.
  int M_bar() const { return omega_.empty() ? 0 : omega_.back() - omega_.front() + 1; }
  bool is_complete() const { return L() == M_; }
  /// 0-based position of each observed sample in the full index set.
  std::vector<int> zero_based() const;

  bool operator==(const SampleSet&) const = default;

 private:
  std::vector<int> omega_;
  int M_ = 0;
};

namespace sampling {
struct Complete {};
struct Explicit {
  std::vector<int> indices;
};
struct Random {
  int L = 0;
  std::uint64_t seed = 0;
};
}  // namespace sampling

using SamplingSpec = std::variant<sampling::Complete, sampling::Explicit, sampling::Random>;

SampleSet make_sample_set(int M, const SamplingSpec& spec);

/// Frequencies in [0,1) with complex amplitudes; powers are |s_k|^2.
struct LineSpectralModel {
  std::vector<double> freqs;
  std::vector<cplx> amps;

  std::size_t order() const { return freqs.size(); }
  std::vector<double> powers() const;
  /// Throws InvalidArgument on size mismatch or frequencies outside [0,1).
  void validate() const;

  /// Amplitudes sqrt(p_k) * exp(i phi_k) with phi_k ~ U[0, 2pi).
  static LineSpectralModel from_powers(std::vector<double> freqs, const std::vector<double>& powers,
                                       Rng& rng);
};

struct NoiseSpec {
  enum class Kind { none, homoscedastic, heteroscedastic };
  Kind kind = Kind::none;
  double sigma = 0.0;          // homoscedastic variance
  std::vector<double> sigmas;  // heteroscedastic variances, one per observed sample

  static NoiseSpec none() { return {}; }
  static NoiseSpec homoscedastic(double sigma) { return {Kind::homoscedastic, sigma, {}}; }
  static NoiseSpec heteroscedastic(std::vector<double> s) {
    return {Kind::heteroscedastic, 0.0, std::move(s)};
  }
  void validate(int L) const;
};

struct Observation {
  VectorXcd y;  // length L, ordered as sample_set.omega()
  SampleSet sample_set;
  std::optional<LineSpectralModel> truth;
  std::optional<VectorXd> sigma_truth;

  /// Throws InvalidArgument when y.size() != L.
  void validate() const;
};

/// Entry j equals exp(i 2 pi (Omega_j - 1) f). Throws DomainError unless f in [0,1).
VectorXcd steering_vector(double f, const SampleSet& omega);

/// L x K matrix [a_Omega(f_1), ..., a_Omega(f_K)]; frequencies are not range-checked.
MatrixXcd steering_matrix(const std::vector<double>& freqs, const SampleSet& omega);

/// Same as steering_vector over the full index set [1, M].
VectorXcd full_steering_vector(double f, int M);

/// y = A_Omega(f) s + e with circular complex Gaussian e, E|e_j|^2 = sigma_j.
Observation generate_signal(const LineSpectralModel& model, const NoiseSpec& noise,
                            const SampleSet& omega, std::uint64_t seed);

/// sigma = 10^(-snr_db / 10).
double snr_to_sigma(double snr_db);

/// Wrap-around distance on the unit frequency circle.
double circular_distance(double a, double b);

/// Reduce to [0, 1).
double wrap_frequency(double f);

}  // namespace lse
