#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "lse/grid.hpp"
#include "lse/gls.hpp"
#include "lse/postprocess.hpp"
#include "lse/serialize.hpp"

namespace lse {

/// How each trial draws its line spectrum.
struct ModelSpec {
  enum class Kind {
    fixed,             // freqs as given
    intervals,         // one frequency uniform in each (lo, hi)
    random_separated,  // K frequencies on [0,1) with wrap-around separation >= min_sep
    pair,              // f1 uniform in (lo, hi), f2 = f1 + separation
  };
  Kind kind = Kind::fixed;
  std::vector<double> freqs;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> powers;
  int K = 0;
  double min_sep = 0.0;
  /// min_sep was given in units of 1/M; it is rescaled when M is swept.
  bool min_sep_per_M = false;
  std::pair<double, double> range{0.0, 1.0};
  double separation = 0.0;

  int order() const;
  LineSpectralModel draw(Rng& rng) const;
};

struct SweepSpec {
  enum class Param { none, snr_db, sigma, separation, M };
  Param param = Param::none;
  std::vector<double> values;
  /// separation values are multiplied by 1/M when set.
  bool per_M = false;
};

struct MethodSpec {
  enum class Base { ast, gls_hetero, gls_homo, bp, lad, sr, grid };
  enum class Post { none, framework_oracle, framework_sorte };
  std::string name;
  Base base = Base::gls_hetero;
  Post post = Post::none;
  AndVariant grid_variant = AndVariant::gl_lad_lasso;
  double grid_weight = -1.0;
  /// Grid size; negative means a multiple of M (-5 is 5M).
  int N = 0;
  /// Sweep values the method runs at; empty means all.
  std::vector<double> only_at;

  /// ast | gls-hetero | gls-homo | bp | and-lad | and-sr | grid:<variant>:<N or kM>,
  /// optionally prefixed by framework: (oracle order in MUSIC) or framework-sorte:.
  static MethodSpec parse(const std::string& name);
  std::string base_key() const;
  int grid_size(int M) const;
};

struct CheckSpec {
  std::string name;
  /// mse | order_rate | resolve_rate | converged_rate
  std::string metric;
  std::string method;
  /// >= | <= | > | < | nondecreasing
  std::string op = ">=";
  double value = 0.0;
  /// Tolerated decrease for nondecreasing checks.
  double slack = 0.0;
  /// Sweep values to check; empty means all.
  std::vector<double> at;
  bool acceptance = true;
};

struct ExperimentConfig {
  std::string scenario = "experiment";
  int M = 0;
  SamplingSpec sampling = sampling::Complete{};
  /// With random sampling, L = round(sample_fraction * M) when positive (for M sweeps).
  double sample_fraction = 0.0;
  /// Redraw Omega in every trial when sampling is random.
  bool resample_omega = true;
  ModelSpec model;
  /// Base noise; the sweep overrides snr_db / sigma.
  std::string noise_kind = "homoscedastic";
  double sigma = 0.0;
  SweepSpec sweep;
  std::vector<MethodSpec> methods;
  int trials = 40;
  std::uint64_t seed = 1;
  SolverOptions solver;
  GridOptions grid;
  bool shift_before_sorte = false;
  int threads = 0;
  /// Spectra are kept for the first `spectrum_trials` trials of each sweep point.
  int spectrum_trials = 0;
  std::vector<CheckSpec> checks;

  void validate() const;
};

ExperimentConfig experiment_from_json(const serial::json& j);

struct SpectrumLine {
  double f;
  double amplitude;
};

/// Result of the estimation step a method is built on (shared by its framework variant).
struct BaseEstimate {
  /// Covariance parameter handed to the framework.
  ToeplitzParam u;
  std::vector<double> freqs;
  /// Ranking weight per component (power, or |s| on the grid).
  std::vector<double> weights;
  std::vector<SpectrumLine> spectrum;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  double wall_ms = 0.0;
  /// gls | ast | bp | and-lad | and-sr | grid
  std::string source;
};

/// `sigma` is the noise variance used by ast (mu from mu_star).
BaseEstimate solve_base(const MethodSpec& method, const Observation& obs, double sigma,
                        const SolverOptions& solver = {}, const GridOptions& grid = {});

struct MetricsRecord {
  double x = 0.0;
  int sweep_index = 0;
  int trial = 0;
  std::string method;
  bool ok = true;
  std::string error;
  int K_true = 0;
  /// SORTE order; -1 when the method does not run the framework.
  int K_hat = -1;
  bool order_hit = false;
  std::vector<double> freqs;
  std::vector<double> truth;
  double mse = 0.0;
  bool resolved = false;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  double wall_ms = 0.0;
  std::vector<SpectrumLine> spectrum;
};

struct SummaryRow {
  double x = 0.0;
  std::string method;
  int n = 0;
  int failures = 0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  /// NaN when the method has no order estimate.
  double order_rate = 0.0;
  double resolve_rate = 0.0;
  double converged_rate = 0.0;
  double wall_ms_mean = 0.0;
};

struct CheckResult {
  CheckSpec spec;
  bool pass = false;
  std::string detail;
};

struct MetricsTable {
  std::string scenario;
  std::vector<MetricsRecord> records;  // sorted by (sweep index, method order, trial)
  std::vector<SummaryRow> summary;     // sorted by (x, method)
  std::vector<CheckResult> checks;

  bool acceptance_passed() const;
};

/// Frequency MSE after optimal assignment on wrap-around distance. Truth lines without an
/// estimate take the distance to the nearest estimate (0.25 when there is none).
double matched_mse(const std::vector<double>& estimate, const std::vector<double>& truth,
                   bool* all_within = nullptr, double radius = 0.0);

/// Minimum-cost assignment of rows to columns (rows <= cols); returns the column per row.
std::vector<int> optimal_assignment(const std::vector<std::vector<double>>& cost);

MetricsTable run_experiment(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records);
std::vector<CheckResult> evaluate_checks(const std::vector<CheckSpec>& checks,
                                         const std::vector<SummaryRow>& summary);

enum class PlotKind { spectrum, curve };

/// Writes CSV plot data under `dir`; returns the file paths written.
std::vector<std::string> emit_plot_data(const MetricsTable& table, PlotKind kind,
                                        const std::string& dir);

/// metrics.csv, summary.csv, trials.json, checks.json and the curve files.
std::vector<std::string> write_outputs(const MetricsTable& table, const std::string& dir);

/// CSV text of the per-trial records (no wall-clock columns, so replays are byte-identical).
std::string records_csv(const std::vector<MetricsRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace lse
