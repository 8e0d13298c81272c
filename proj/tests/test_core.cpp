#include <doctest.h>

#include <cmath>

#include "lse/core.hpp"
#include "test_util.hpp"

using namespace lse;

TEST_CASE("sample sets") {
  const SampleSet c = SampleSet::complete(5);
  CHECK(c.L() == 5);
  CHECK(c.M_bar() == 5);
  CHECK(c.is_complete());
  CHECK(c.zero_based() == std::vector<int>{0, 1, 2, 3, 4});

  const SampleSet e({2, 4, 9}, 10);
  CHECK(e.M_bar() == 8);
  CHECK_FALSE(e.is_complete());

  CHECK_THROWS_AS(SampleSet({3, 2}, 10), InvalidArgument);
  CHECK_THROWS_AS(SampleSet({0, 2}, 10), InvalidArgument);
  CHECK_THROWS_AS(SampleSet({2, 11}, 10), InvalidArgument);
  CHECK_THROWS_AS(make_sample_set(10, sampling::Random{11, 1}), InvalidArgument);

  const SampleSet r1 = make_sample_set(100, sampling::Random{50, 42});
  const SampleSet r2 = make_sample_set(100, sampling::Random{50, 42});
  CHECK(r1 == r2);
  CHECK(r1.L() == 50);
  CHECK(std::is_sorted(r1.omega().begin(), r1.omega().end()));
}

TEST_CASE("steering vector norm equals sqrt(L)") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> Md(2, 200);
  for (int t = 0; t < 200; ++t) {
    const int M = Md(rng);
    const int L = std::uniform_int_distribution<int>(1, M)(rng);
    const SampleSet omega = testutil::random_omega(rng, M, L);
    const double f = u(rng);
    const VectorXcd a = steering_vector(f, omega);
    CHECK(std::abs(a.norm() - std::sqrt(static_cast<double>(L))) < 1e-12 * std::sqrt(L));
    // Entries follow the full-index vector.
    const VectorXcd full = full_steering_vector(f, M);
    for (int j = 0; j < L; ++j) CHECK(std::abs(a[j] - full[omega.omega()[j] - 1]) < 1e-12);
  }
  CHECK_THROWS_AS(steering_vector(1.0, SampleSet::complete(4)), DomainError);
  CHECK_THROWS_AS(steering_vector(-0.1, SampleSet::complete(4)), DomainError);
}

TEST_CASE("noiseless signal is the steering sum") {
  Rng rng(5);
  const LineSpectralModel m = LineSpectralModel::from_powers({0.1, 0.35}, {4.0, 1.0}, rng);
  const SampleSet omega({1, 3, 4, 8}, 8);
  const Observation obs = generate_signal(m, NoiseSpec::none(), omega, 9);
  for (int j = 0; j < omega.L(); ++j) {
    cplx expect = 0;
    for (std::size_t k = 0; k < m.order(); ++k)
      expect += m.amps[k] * std::polar(1.0, kTwoPi * (omega.omega()[j] - 1) * m.freqs[k]);
    CHECK(std::abs(obs.y[j] - expect) < 1e-12);
  }
  CHECK(std::abs(m.powers()[0] - 4.0) < 1e-12);
}

TEST_CASE("noise has the requested variance split evenly over re and im") {
  const LineSpectralModel m{{0.2}, {cplx(0, 0)}};
  const int M = 40000;
  const double sigma = 0.3;
  const Observation obs = generate_signal(m, NoiseSpec::homoscedastic(sigma), SampleSet::complete(M), 77);
  double re2 = 0, im2 = 0;
  for (int j = 0; j < M; ++j) {
    re2 += obs.y[j].real() * obs.y[j].real();
    im2 += obs.y[j].imag() * obs.y[j].imag();
  }
  CHECK(std::abs(re2 / M - sigma / 2) < 0.03 * sigma);
  CHECK(std::abs(im2 / M - sigma / 2) < 0.03 * sigma);
  REQUIRE(obs.sigma_truth);
  CHECK((*obs.sigma_truth).size() == M);

  const Observation a = generate_signal(m, NoiseSpec::homoscedastic(sigma), SampleSet::complete(8), 5);
  const Observation b = generate_signal(m, NoiseSpec::homoscedastic(sigma), SampleSet::complete(8), 5);
  CHECK(a.y == b.y);
}

TEST_CASE("heteroscedastic noise respects per-sample variances") {
  const LineSpectralModel m{{0.2}, {cplx(0, 0)}};
  std::vector<double> s(4, 0.0);
  s[2] = 1.0;
  const Observation obs = generate_signal(m, NoiseSpec::heteroscedastic(s), SampleSet::complete(4), 3);
  CHECK(obs.y[0] == cplx(0, 0));
  CHECK(obs.y[2] != cplx(0, 0));
  CHECK_THROWS_AS(generate_signal(m, NoiseSpec::heteroscedastic({1.0}), SampleSet::complete(4), 3),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_signal(m, NoiseSpec::homoscedastic(-1.0), SampleSet::complete(4), 3),
                  InvalidArgument);
}

TEST_CASE("frequency helpers") {
  CHECK(snr_to_sigma(10) == doctest::Approx(0.1));
  CHECK(snr_to_sigma(-20) == doctest::Approx(100.0));
  CHECK(circular_distance(0.95, 0.05) == doctest::Approx(0.1));
  CHECK(circular_distance(0.3, 0.3) == 0.0);
  CHECK(wrap_frequency(1.25) == doctest::Approx(0.25));
  CHECK(wrap_frequency(-0.25) == doctest::Approx(0.75));
  CHECK(wrap_frequency(-1e-18) < 1.0);
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) == stream_seed(1, 0));
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS((LineSpectralModel{{1.0}, {cplx(1, 0)}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((LineSpectralModel{{0.1, 0.2}, {cplx(1, 0)}}.validate()), InvalidArgument);
  Rng rng(1);
  CHECK_THROWS_AS(LineSpectralModel::from_powers({0.1}, {-1.0}, rng), InvalidArgument);
}
