#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "statlim/qmodel.hpp"
#include "statlim/solvers.hpp"
#include "statlim/synth.hpp"

namespace statlim::scaling {

/// Power law value ~ 2^intercept * n^exponent fitted by OLS on (log2 n, log2 value).
struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double stderr_exponent = 0.0;
  std::size_t points = 0;
};

/// Requires >= 3 points with positive n and value; a nonpositive value throws
/// InvalidArgument naming its n. A constant series has r_squared = 1.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points);

struct GammaRule {
  enum class Kind { constant, matched };
  Kind kind = Kind::constant;
  double value = 0.0;  // constant: gamma0; matched: c0 in c0 * n^{-1/2}

  double at(std::size_t n) const;
};

struct MeasurementRule {
  enum class Kind { fixed, sqrt_n, fourth_root_n, linear_n };
  Kind kind = Kind::fixed;
  std::size_t fixed_m = 1;

  /// ceil(sqrt(n)), ceil(n^{1/4}), n, or fixed_m.
  std::size_t at(std::size_t n) const;
};

struct NoiseSchedule {
  GammaRule gamma;
  MeasurementRule measurements;
  qmodel::PrecisionRegime regime = qmodel::PrecisionRegime::exact;
  double precision_constant = 1.0;

  qmodel::NoiseModel at(std::size_t n, std::uint64_t seed) const;
};

struct ProblemSpec {
  Eigen::Index d = 10;
  double sigma = 0.5;
  InputLaw input_law = InputLaw::unit_sphere;
};

struct SweepConfig {
  std::vector<std::size_t> n_grid;
  std::size_t trials = 20;
  SolverKind solver = SolverKind::exact_ls;
  Kernel kernel = Kernel::linear();
  SolverConfig solver_config;  // lambda unset: n^{-1/2} at each grid point
  std::optional<NoiseSchedule> noise;
  ProblemSpec problem;
  std::uint64_t master_seed = 0;
  std::size_t n_eval = 100000;
  std::size_t workers = 1;

  /// n_grid strictly increasing with >= 3 entries, trials >= 1, n_eval >= 2.
  void validate() const;
};

/// The problem shared by every cell of a sweep with this seed.
SyntheticProblem sweep_problem(const ProblemSpec& spec, std::uint64_t master_seed);

/// Stream seeds of one (n, trial) cell. Depend only on (master_seed, n, trial),
/// so sweeps that differ only in noise or solver see the same data.
struct CellSeeds {
  std::uint64_t data;
  std::uint64_t eval;
  std::uint64_t noise;
  std::uint64_t solver;
};
CellSeeds cell_seeds(std::uint64_t master_seed, std::size_t n, std::size_t trial);

struct SweepCell {
  std::size_t n = 0;
  std::size_t trial = 0;
  double excess = 0.0;
  double std_error = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepRow {
  std::size_t n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double median_std_error = 0.0;
  std::size_t ok = 0;
  std::size_t failed = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;  // grid-major, trial-minor

  /// (n, median) for rows with at least one successful trial.
  std::vector<std::pair<double, double>> medians() const;
  std::size_t failures() const;
};

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);

/// Fits the configured solver on a fresh dataset per (n, trial), applies the
/// noise schedule if any, and records the paired excess risk. Failed cells
/// are kept, flagged and excluded from the aggregates. The output is
/// independent of `workers`.
SweepTable sweep_excess_risk(const SweepConfig& config);

struct RatioRow {
  std::size_t n = 0;
  double noisy = 0.0;
  double exact = 0.0;
  double ratio = 0.0;
  double mc_tolerance = 0.0;  // 4 combined standard errors, relative to `exact`
};

struct Comparison {
  std::string label;
  SweepTable table;
  std::vector<RatioRow> ratios;
  std::optional<ScalingFit> fit;  // of the noisy medians, when all are positive
};

/// Per-n ratio of median noisy excess risk to median exact excess risk.
Comparison compare_to_exact(std::string label, const SweepTable& exact, SweepTable noisy);

struct MatchingConfig {
  SweepConfig base;  // solver must yield primal predictors; base.noise is ignored
  double matched_scale = 0.1;   // gamma = c0 n^{-1/2}
  double constant_gamma = 0.3;
};

struct MatchingReport {
  SweepTable exact;
  std::optional<ScalingFit> exact_fit;
  Comparison matched;
  Comparison constant;
};

MatchingReport matching_experiment(const MatchingConfig& config);

struct MeasurementConfig {
  SweepConfig base;
  qmodel::PrecisionRegime regime = qmodel::PrecisionRegime::heisenberg;
  double precision_constant = 1.0;
};

struct MeasurementReport {
  SweepTable exact;
  std::optional<ScalingFit> exact_fit;
  Comparison sqrt_rule;         // m = ceil(sqrt(n))
  Comparison fourth_root_rule;  // m = ceil(n^{1/4})
};

MeasurementReport measurement_experiment(const MeasurementConfig& config);

struct BenchmarkConfig {
  std::vector<SolverKind> solvers;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 5;
  double timeout_seconds = 120.0;
  ProblemSpec problem;
  Kernel kernel = Kernel::gaussian(1.0);
  SolverConfig solver_config;
  std::size_t n_test = 1000;
  std::uint64_t seed = 0;
  std::size_t max_n = 8192;

  void validate() const;
};

struct BenchmarkRow {
  SolverKind solver{};
  std::size_t n = 0;
  double train_seconds = 0.0;  // median over reps
  double test_seconds = 0.0;   // median over reps, whole test set
  std::size_t reps_done = 0;
  bool timed_out = false;
};

struct BenchmarkSeries {
  SolverKind solver{};
  std::optional<ScalingFit> train_fit;
  std::optional<ScalingFit> test_fit;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkSeries> series;
  bool any_timeout() const;
};

/// Serial wall-clock timing on a monotonic clock. Each cell runs one discarded
/// warm-up and then `reps` timed runs. A run over the timeout flags its cell
/// and every larger n of the same solver.
BenchmarkReport runtime_benchmark(const BenchmarkConfig& config);

}  // namespace statlim::scaling
