#include "lse/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lse {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampleSet::SampleSet(std::vector<int> omega, int M) : omega_(std::move(omega)), M_(M) {
  if (M < 0) throw InvalidArgument("sample set: M must be nonnegative");
  if (M > 0 && omega_.empty()) throw InvalidArgument("sample set: empty index set");
  for (std::size_t j = 0; j < omega_.size(); ++j) {
    if (omega_[j] < 1 || omega_[j] > M)
      throw InvalidArgument("sample set: index " + std::to_string(omega_[j]) + " outside [1, " +
                            std::to_string(M) + "]");
    if (j > 0 && omega_[j] <= omega_[j - 1])
      throw InvalidArgument("sample set: indices must be distinct and strictly increasing");
  }
}

SampleSet SampleSet::complete(int M) {
  std::vector<int> idx(M);
  std::iota(idx.begin(), idx.end(), 1);
  return SampleSet(std::move(idx), M);
}

std::vector<int> SampleSet::zero_based() const {
  std::vector<int> out(omega_.size());
  std::transform(omega_.begin(), omega_.end(), out.begin(), [](int i) { return i - 1; });
  return out;
}

namespace {

struct SampleSetBuilder {
  int M;
  SampleSet operator()(const sampling::Complete&) const { return SampleSet::complete(M); }
  SampleSet operator()(const sampling::Explicit& e) const {
    std::vector<int> idx = e.indices;
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
      throw InvalidArgument("sample set: duplicate indices");
    return SampleSet(std::move(idx), M);
  }
  SampleSet operator()(const sampling::Random& r) const {
    if (r.L < 1 || r.L > M) throw InvalidArgument("sample set: need 1 <= L <= M");
    std::vector<int> all(M);
    std::iota(all.begin(), all.end(), 1);
    std::vector<int> idx;
    idx.reserve(r.L);
    Rng rng(r.seed);
    std::sample(all.begin(), all.end(), std::back_inserter(idx), r.L, rng);
    return SampleSet(std::move(idx), M);
  }
};

}  // namespace

SampleSet make_sample_set(int M, const SamplingSpec& spec) {
  if (M < 1) throw InvalidArgument("sample set: M must be positive");
  return std::visit(SampleSetBuilder{M}, spec);
}

std::vector<double> LineSpectralModel::powers() const {
  std::vector<double> p(amps.size());
  std::transform(amps.begin(), amps.end(), p.begin(), [](cplx s) { return std::norm(s); });
  return p;
}

void LineSpectralModel::validate() const {
  if (freqs.size() != amps.size())
    throw InvalidArgument("model: freqs and amps have different lengths");
  for (double f : freqs)
    if (!(f >= 0.0 && f < 1.0)) throw InvalidArgument("model: frequency outside [0,1)");
}

LineSpectralModel LineSpectralModel::from_powers(std::vector<double> freqs,
                                                 const std::vector<double>& powers, Rng& rng) {
  if (freqs.size() != powers.size())
    throw InvalidArgument("model: freqs and powers have different lengths");
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  LineSpectralModel m;
  m.freqs = std::move(freqs);
  m.amps.reserve(powers.size());
  for (double p : powers) {
    if (p < 0) throw InvalidArgument("model: negative power");
    m.amps.push_back(std::polar(std::sqrt(p), phase(rng)));
  }
  m.validate();
  return m;
}

void NoiseSpec::validate(int L) const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::homoscedastic:
      if (!(sigma >= 0)) throw InvalidArgument("noise: sigma must be >= 0");
      return;
    case Kind::heteroscedastic:
      if (static_cast<int>(sigmas.size()) != L)
        throw InvalidArgument("noise: heteroscedastic sigma length must equal L");
      for (double s : sigmas)
        if (!(s >= 0)) throw InvalidArgument("noise: sigma entries must be >= 0");
      return;
  }
}

void Observation::validate() const {
  if (y.size() != sample_set.L()) throw InvalidArgument("observation: length of y must equal L");
}

VectorXcd steering_vector(double f, const SampleSet& omega) {
  if (!(f >= 0.0 && f < 1.0)) throw DomainError("steering_vector: frequency outside [0,1)");
  VectorXcd a(omega.L());
  for (int j = 0; j < omega.L(); ++j) a[j] = std::polar(1.0, kTwoPi * (omega.omega()[j] - 1) * f);
  return a;
}

MatrixXcd steering_matrix(const std::vector<double>& freqs, const SampleSet& omega) {
  MatrixXcd A(omega.L(), static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t k = 0; k < freqs.size(); ++k)
    for (int j = 0; j < omega.L(); ++j)
      A(j, k) = std::polar(1.0, kTwoPi * (omega.omega()[j] - 1) * freqs[k]);
  return A;
}

VectorXcd full_steering_vector(double f, int M) {
  VectorXcd a(M);
  for (int m = 0; m < M; ++m) a[m] = std::polar(1.0, kTwoPi * m * f);
  return a;
}

Observation generate_signal(const LineSpectralModel& model, const NoiseSpec& noise,
                            const SampleSet& omega, std::uint64_t seed) {
  model.validate();
  noise.validate(omega.L());
  Observation obs;
  obs.sample_set = omega;
  obs.y = VectorXcd::Zero(omega.L());
  for (std::size_t k = 0; k < model.order(); ++k)
    obs.y += steering_vector(model.freqs[k], omega) * model.amps[k];

  if (noise.kind != NoiseSpec::Kind::none) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXd var(omega.L());
    for (int j = 0; j < omega.L(); ++j) {
      var[j] = noise.kind == NoiseSpec::Kind::homoscedastic ? noise.sigma : noise.sigmas[j];
      const double sd = std::sqrt(var[j] / 2.0);
      const double re = gauss(rng);
      const double im = gauss(rng);
      obs.y[j] += cplx(sd * re, sd * im);
    }
    obs.sigma_truth = var;
  }
  obs.truth = model;
  return obs;
}

double snr_to_sigma(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

double wrap_frequency(double f) {
  double w = f - std::floor(f);
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace lse
