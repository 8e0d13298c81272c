#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "lse/harness.hpp"
#include "lse/io.hpp"
#include "test_util.hpp"

using namespace lse;

namespace {

double brute_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size()), m = static_cast<int>(cost[0].size());
  std::vector<int> cols(m);
  std::iota(cols.begin(), cols.end(), 0);
  double best = INFINITY;
  do {
    double s = 0;
    for (int i = 0; i < n; ++i) s += cost[i][cols[i]];
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

ExperimentConfig small_config() {
  return experiment_from_json(serial::json::parse(R"({
    "scenario": "unit",
    "M": 16,
    "sampling": {"kind": "random", "L": 10},
    "model": {"kind": "intervals", "intervals": [[0.1, 0.12], [0.5, 0.52]], "powers": [4, 1]},
    "noise": {"sigma": 0.05},
    "sweep": {"param": "snr_db", "values": [10, 20]},
    "methods": ["gls-hetero", "framework-sorte:gls-hetero", {"name": "grid:lad:4M", "at": [20]}],
    "trials": 3,
    "seed": 5,
    "threads": 1,
    "spectrum_trials": 1,
    "checks": [
      {"metric": "mse", "method": "gls-hetero", "op": "<=", "value": 1.0},
      {"metric": "order_rate", "method": "framework-sorte:gls-hetero", "op": ">=", "value": 2.0, "acceptance": false}
    ]
  })"));
}

}  // namespace

TEST_CASE("optimal assignment matches brute force") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    const int m = std::uniform_int_distribution<int>(n, 6)(rng);
    std::vector<std::vector<double>> cost(n, std::vector<double>(m));
    for (auto& row : cost)
      for (double& c : row) c = u(rng);
    const auto a = optimal_assignment(cost);
    double s = 0;
    std::vector<int> used;
    for (int i = 0; i < n; ++i) {
      s += cost[i][a[i]];
      used.push_back(a[i]);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(s == doctest::Approx(brute_assignment(cost)).epsilon(1e-12));
  }
}

TEST_CASE("matched mse") {
  bool within = false;
  CHECK(matched_mse({0.1, 0.2}, {0.2, 0.1}, &within, 0.01) == 0.0);
  CHECK(within);
  CHECK(matched_mse({0.99}, {0.01}, &within, 0.01) == doctest::Approx(0.0004));
  CHECK_FALSE(within);
  // Missing estimate: the unmatched truth takes the distance to the nearest estimate.
  CHECK(matched_mse({0.1}, {0.1, 0.3}, &within, 0.5) == doctest::Approx(0.02));
  CHECK_FALSE(within);
  CHECK(matched_mse({}, {0.1}, &within, 0.5) == doctest::Approx(0.0625));
  // Extra estimates are ignored by the assignment.
  CHECK(matched_mse({0.5, 0.1, 0.9}, {0.1}) == 0.0);
}

TEST_CASE("method names") {
  const MethodSpec g = MethodSpec::parse("grid:lad:5M");
  CHECK(g.base == MethodSpec::Base::grid);
  CHECK(g.grid_size(100) == 500);
  CHECK(MethodSpec::parse("grid:sr:300").grid_size(100) == 300);
  const MethodSpec f = MethodSpec::parse("framework-sorte:gls-homo");
  CHECK(f.post == MethodSpec::Post::framework_sorte);
  CHECK(f.base_key() == "gls-homo");
  CHECK(MethodSpec::parse("framework:ast").post == MethodSpec::Post::framework_oracle);
  CHECK_THROWS_AS(MethodSpec::parse("music"), InvalidArgument);
  CHECK_THROWS_AS(MethodSpec::parse("grid:lad"), InvalidArgument);
  CHECK_THROWS_AS(MethodSpec::parse("grid:lasso:5M"), InvalidArgument);
}

TEST_CASE("config validation") {
  auto base = serial::json::parse(R"({"M": 8, "model": {"freqs": [0.1]}, "methods": ["bp"]})");
  CHECK_NOTHROW(experiment_from_json(base));
  auto bad = base;
  bad["trials"] = 0;
  CHECK_THROWS_AS(experiment_from_json(bad), InvalidArgument);
  bad = base;
  bad["methods"] = {"nope"};
  CHECK_THROWS_AS(experiment_from_json(bad), InvalidArgument);
  bad = base;
  bad["model"]["kind"] = "cloud";
  CHECK_THROWS_AS(experiment_from_json(bad), InvalidArgument);
}

TEST_CASE("noiseless basis pursuit sanity run") {
  auto j = serial::json::parse(R"({"M": 32, "model": {"freqs": [0.1, 0.3, 0.7], "powers": [1, 1, 1]},
                                   "methods": ["bp"], "trials": 1})");
  const MetricsTable t = run_experiment(experiment_from_json(j));
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].ok);
  CHECK(t.records[0].mse < 1e-8);
  CHECK(t.records[0].resolved);
}

TEST_CASE("replays are byte-identical and independent of threading") {
  ExperimentConfig a = small_config();
  ExperimentConfig b = small_config();
  b.threads = 3;
  const MetricsTable ta = run_experiment(a);
  const MetricsTable tb = run_experiment(b);
  CHECK(records_csv(ta.records) == records_csv(tb.records));
  CHECK(summary_csv(ta.summary) == summary_csv(tb.summary));

  // 2 sweep points x 3 trials x 2 methods, plus the grid method at one point.
  CHECK(ta.records.size() == 2 * 3 * 2 + 3);
  CHECK(ta.checks.size() == 2);
  CHECK(ta.checks[0].pass);
  CHECK_FALSE(ta.checks[1].pass);
  CHECK(ta.acceptance_passed());
  for (const auto& r : ta.records) {
    CHECK(r.ok);
    CHECK(r.mse >= 0);
  }

  const auto dir = std::filesystem::temp_directory_path() / "lse_harness_test";
  std::filesystem::remove_all(dir);
  const auto files = write_outputs(ta, dir.string());
  CHECK(std::filesystem::exists(dir / "metrics.csv"));
  CHECK(std::filesystem::exists(dir / "curve_mse.csv"));
  CHECK(std::filesystem::exists(dir / "spectrum_gls-hetero_0_0.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "spectrum_gls-hetero_0_1.csv"));
  const std::string curve = io::read_file((dir / "curve_mse.csv").string());
  CHECK(curve.rfind("x,method,mean,stderr\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty metrics give header-only plot files") {
  const auto dir = std::filesystem::temp_directory_path() / "lse_harness_empty";
  std::filesystem::remove_all(dir);
  MetricsTable empty;
  const auto files = emit_plot_data(empty, PlotKind::curve, dir.string());
  REQUIRE(files.size() == 3);
  CHECK(io::read_file(files[0]) == "x,method,mean,stderr\n");
  CHECK(emit_plot_data(empty, PlotKind::spectrum, dir.string()).empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("per-trial failures are recorded, not fatal") {
  // ast needs a noise variance; with noise off it fails in every trial.
  auto j = serial::json::parse(R"({"M": 12, "model": {"freqs": [0.2]}, "methods": ["ast", "bp"],
                                   "trials": 2, "threads": 1})");
  const MetricsTable t = run_experiment(experiment_from_json(j));
  int failed = 0, ok = 0;
  for (const auto& r : t.records) (r.ok ? ok : failed)++;
  CHECK(failed == 2);
  CHECK(ok == 2);
  const auto it = std::find_if(t.summary.begin(), t.summary.end(), [](const SummaryRow& r) { return r.method == "ast"; });
  REQUIRE(it != t.summary.end());
  CHECK(it->failures == 2);
}
