#include <doctest.h>

#include <cmath>

#include "lse/grid.hpp"
#include "test_util.hpp"

using namespace lse;

TEST_CASE("dictionary columns are steering vectors") {
  const SampleSet omega({1, 4, 5, 9}, 10);
  const GridDictionary d = build_dictionary(40, omega);
  CHECK(d.matrix.cols() == 40);
  for (int k : {0, 7, 39}) CHECK((d.matrix.col(k) - steering_vector(k / 40.0, omega)).norm() < 1e-12);
  CHECK_THROWS_AS(build_dictionary(1, omega), InvalidArgument);
}

TEST_CASE("grid basis pursuit recovers an on-grid sparse vector") {
  const int M = 32, N = 64;
  const SampleSet omega = SampleSet::complete(M);
  const GridDictionary d = build_dictionary(N, omega);
  VectorXcd s0 = VectorXcd::Zero(N);
  s0[5] = cplx(1.0, 0.5);
  s0[23] = cplx(-0.7, 0.2);
  s0[50] = cplx(0.0, 1.3);
  Observation obs;
  obs.sample_set = omega;
  obs.y = d.matrix * s0;
  GridOptions o;
  o.tol_abs = 1e-10;
  o.tol_rel = 1e-10;
  const GridSolution sol = solve_grid_l1nd(GridVariant::basis_pursuit(), d, obs, o);
  CHECK(sol.converged);
  CHECK((sol.s - s0).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(sol.support == std::vector<int>{5, 23, 50});
  const auto peaks = grid_peaks(sol.s, 2);
  CHECK(peaks == std::vector<int>{50, 5});
}

TEST_CASE("grid objective is never below the gridless optimum") {
  Rng rng(17);
  const int M = 20;
  const LineSpectralModel m = LineSpectralModel::from_powers({0.113, 0.42}, {4, 1}, rng);
  const SampleSet omega = testutil::random_omega(rng, M, 12);
  const Observation obs = generate_signal(m, NoiseSpec::homoscedastic(0.5), omega, rng());
  SolverOptions so;
  so.tol_rel = 1e-8;
  so.tol_abs = 1e-9;
  GridOptions go;
  go.tol_abs = 1e-9;
  go.tol_rel = 1e-8;
  double prev = INFINITY;
  for (int N : {5 * M, 10 * M, 20 * M}) {
    const SandwichReport r = sandwich_check(obs, N, GridVariant::lad_lasso(), 1e-4, so, go);
    CHECK(r.pass);
    CHECK(r.upper_ok);
    CHECK(r.grid_opt <= prev * (1 + 1e-6));
    prev = r.grid_opt;
  }
}

TEST_CASE("grid objective matches the variant definition") {
  const SampleSet omega = SampleSet::complete(6);
  const GridDictionary d = build_dictionary(12, omega);
  Observation obs;
  obs.sample_set = omega;
  obs.y = VectorXcd::Ones(6);
  VectorXcd s = VectorXcd::Zero(12);
  s[0] = 0.5;
  const VectorXcd r = obs.y - d.matrix * s;
  CHECK(grid_objective(GridVariant::lad_lasso(2.0), d, obs, s) ==
        doctest::Approx(2.0 * 2 * 0.5 + r.cwiseAbs().sum()));
  CHECK(grid_objective(GridVariant::lasso(3.0), d, obs, s) == doctest::Approx(3.0 * 0.5 + 0.5 * r.squaredNorm()));
  CHECK_THROWS_AS(grid_objective(GridVariant::lasso(1.0), d, obs, VectorXcd::Zero(3)), InvalidArgument);
}
