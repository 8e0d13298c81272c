#include <doctest.h>

#include <filesystem>

#include "lse/io.hpp"
#include "lse/serialize.hpp"
#include "test_util.hpp"

using namespace lse;

TEST_CASE("signal CSV round trip is exact") {
  Rng rng(3);
  const LineSpectralModel m = LineSpectralModel::from_powers({0.1, 0.3}, {1, 2}, rng);
  const Observation obs =
      generate_signal(m, NoiseSpec::homoscedastic(0.3), make_sample_set(20, sampling::Random{9, 4}), 5);
  const Observation back = io::parse_signal_csv(io::signal_csv(obs), 20);
  CHECK(back.sample_set == obs.sample_set);
  CHECK(back.y == obs.y);
  CHECK(io::parse_signal_csv(io::signal_csv(obs), 0).sample_set.M() == obs.sample_set.omega().back());
}

TEST_CASE("signal CSV errors") {
  CHECK_THROWS_AS(io::parse_signal_csv("index,re,im\n1,2\n", 4), IoError);
  CHECK_THROWS_AS(io::parse_signal_csv("index,re,im\n1,x,0\n", 4), IoError);
  CHECK_THROWS_AS(io::parse_signal_csv("index,re,im\n2,0,0\n1,0,0\n", 4), Error);
  CHECK_THROWS_AS(io::read_signal_csv("/nonexistent/signal.csv", 4), IoError);
}

TEST_CASE("atomic write creates directories and replaces content") {
  const auto dir = std::filesystem::temp_directory_path() / "lse_io_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "a" / "b.txt").string();
  io::atomic_write(path, "one");
  io::atomic_write(path, "two");
  CHECK(io::read_file(path) == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23}) CHECK(std::stod(io::format_double(v)) == v);
}

TEST_CASE("json round trips") {
  Rng rng(8);
  const LineSpectralModel m = LineSpectralModel::from_powers({0.25}, {4}, rng);
  const Observation obs = generate_signal(m, NoiseSpec::homoscedastic(0.1), SampleSet({1, 3, 4}, 6), 2);
  const Observation back = serial::observation_from_json(serial::to_json(obs));
  CHECK(back.y == obs.y);
  CHECK(back.sample_set == obs.sample_set);
  REQUIRE(back.truth);
  CHECK(back.truth->freqs == obs.truth->freqs);

  const serial::json pj = {{"freqs", {0.1, 0.2}}, {"powers", {4, 1}}};
  const LineSpectralModel z = serial::model_from_json(pj);
  CHECK(z.amps[0] == cplx(2, 0));

  const SolverOptions so = serial::solver_options_from_json({{"tol", 1e-7}, {"max_iter", 10}});
  CHECK(so.tol_abs == 1e-7);
  CHECK(so.tol_rel == 1e-7);
  CHECK(so.max_iter == 10);
  CHECK_THROWS_AS(serial::solver_options_from_json({{"beta", -1}}), InvalidArgument);

  const NoiseAssumption a = serial::assumption_from_json({{"kind", "known"}, {"sigma0", 0.5}});
  CHECK(a.kind == NoiseAssumption::Kind::known_variance);
  CHECK(a.sigma0 == 0.5);
  CHECK_THROWS_AS(serial::assumption_from_json({{"kind", "known"}}), InvalidArgument);

  const NoiseSpec n = serial::noise_from_json({{"snr_db", 10}}, 3);
  CHECK(n.kind == NoiseSpec::Kind::homoscedastic);
  CHECK(n.sigma == doctest::Approx(0.1));
  CHECK(std::holds_alternative<sampling::Random>(serial::sampling_from_json({{"kind", "random"}, {"L", 3}})));
  CHECK_THROWS_AS(serial::sampling_from_json({{"kind", "sparse"}}), InvalidArgument);
}

TEST_CASE("sorte json writes infinities as null") {
  SorteResult r;
  r.K = 2;
  r.statistic = {0.5, INFINITY};
  const auto j = serial::to_json(r);
  CHECK(j["statistic"][1].is_null());
}
