#include "statlim/scaling.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "statlim/errors.hpp"
#include "statlim/random.hpp"
#include "statlim/risk.hpp"

namespace statlim::scaling {

namespace {

constexpr std::uint64_t kProblemStream = 0x70726f626c656dULL;
constexpr std::uint64_t kCellStream = 0x63656c6cULL;
constexpr std::uint64_t kTestStream = 0x74657374ULL;

std::size_t ceil_fourth_root(std::size_t n) {
  auto r = static_cast<std::size_t>(std::pow(static_cast<double>(n), 0.25));
  while (r > 0 && r * r * r * r > n) --r;
  while (r * r * r * r < n) ++r;
  return r;
}

std::optional<ScalingFit> try_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) return std::nullopt;
  for (const auto& [n, v] : points) {
    if (!(v > 0.0)) return std::nullopt;
  }
  return fit_scaling(points);
}

SweepTable aggregate(const SweepConfig& config, std::vector<SweepCell> cells) {
  SweepTable table;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    std::vector<double> values;
    std::vector<double> errors;
    SweepRow row;
    row.n = config.n_grid[g];
    for (std::size_t t = 0; t < config.trials; ++t) {
      const SweepCell& c = cells[g * config.trials + t];
      if (c.failed) {
        ++row.failed;
        continue;
      }
      values.push_back(c.excess);
      errors.push_back(c.std_error);
    }
    row.ok = values.size();
    if (!values.empty()) {
      row.median = quantile(values, 0.5);
      row.q1 = quantile(values, 0.25);
      row.q3 = quantile(values, 0.75);
      row.iqr = row.q3 - row.q1;
      row.median_std_error = quantile(errors, 0.5);
    } else {
      row.median = row.q1 = row.q3 = row.iqr = row.median_std_error = std::nan("");
    }
    table.rows.push_back(row);
  }
  table.cells = std::move(cells);
  return table;
}

SweepConfig with_noise(const SweepConfig& base, std::optional<NoiseSchedule> noise) {
  SweepConfig c = base;
  c.noise = std::move(noise);
  return c;
}

template <typename F>
double time_seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InvalidArgument("fit_scaling needs at least 3 points");
  const auto k = static_cast<double>(points.size());
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0)) throw InvalidArgument(fmt::format("nonpositive abscissa n = {}", n));
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(fmt::format("nonpositive value {} at n = {}", v, n));
    }
    xs.push_back(std::log2(n));
    ys.push_back(std::log2(v));
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_scaling needs at least two distinct n");

  ScalingFit fit;
  fit.points = points.size();
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.exponent * xs[i]);
    sse += r * r;
  }
  // Relative to the spread of log values; a constant series is fitted exactly.
  const double scale = std::max(1.0, std::abs(my));
  fit.r_squared = syy <= 1e-24 * scale * scale * k ? 1.0 : std::clamp(1.0 - sse / syy, 0.0, 1.0);
  fit.stderr_exponent = std::sqrt(sse / (k - 2.0) / sxx);
  return fit;
}

double GammaRule::at(std::size_t n) const {
  return kind == Kind::constant ? value : value / std::sqrt(static_cast<double>(n));
}

std::size_t MeasurementRule::at(std::size_t n) const {
  switch (kind) {
    case Kind::fixed:
      return fixed_m;
    case Kind::sqrt_n:
      return ceil_sqrt(n);
    case Kind::fourth_root_n:
      return ceil_fourth_root(n);
    case Kind::linear_n:
      return n;
  }
  return fixed_m;
}

qmodel::NoiseModel NoiseSchedule::at(std::size_t n, std::uint64_t seed) const {
  return {gamma.at(n), regime, measurements.at(n), precision_constant, seed};
}

void SweepConfig::validate() const {
  if (n_grid.size() < 3) throw InvalidArgument("n_grid needs at least 3 entries");
  if (n_grid.front() < 1) throw InvalidArgument("n_grid entries must be >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw InvalidArgument("n_grid must be strictly increasing");
  }
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (n_eval < 2) throw InvalidArgument("n_eval must be >= 2");
  if (problem.d < 1) throw InvalidArgument("problem dimension must be >= 1");
  if (!(problem.sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (noise) {
    if (solver != SolverKind::exact_ls &&
        !(solver == SolverKind::early_stopping && kernel.kind == Kernel::Kind::linear)) {
      throw InvalidArgument("solver noise requires a primal solver (exact_ls or linear early_stopping)");
    }
    if (!(noise->gamma.value >= 0.0)) throw InvalidArgument("gamma must be >= 0");
    if (noise->measurements.kind == MeasurementRule::Kind::fixed && noise->measurements.fixed_m < 1) {
      throw InvalidArgument("measurement count must be >= 1");
    }
  }
}

SyntheticProblem sweep_problem(const ProblemSpec& spec, std::uint64_t master_seed) {
  return make_problem(spec.d, spec.sigma, spec.input_law, derive_seed(master_seed, kProblemStream));
}

CellSeeds cell_seeds(std::uint64_t master_seed, std::size_t n, std::size_t trial) {
  const std::uint64_t base = derive_seed(master_seed, kCellStream, n, trial);
  return {derive_seed(base, 0), derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3)};
}

std::vector<std::pair<double, double>> SweepTable::medians() const {
  std::vector<std::pair<double, double>> out;
  for (const SweepRow& r : rows) {
    if (r.ok > 0) out.emplace_back(static_cast<double>(r.n), r.median);
  }
  return out;
}

std::size_t SweepTable::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return c.failed; }));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

SweepTable sweep_excess_risk(const SweepConfig& config) {
  config.validate();
  const SyntheticProblem problem = sweep_problem(config.problem, config.master_seed);
  const std::size_t total = config.n_grid.size() * config.trials;
  std::vector<SweepCell> cells(total);

  auto run_cell = [&](std::size_t index) {
    SweepCell& cell = cells[index];
    cell.n = config.n_grid[index / config.trials];
    cell.trial = index % config.trials;
    const CellSeeds seeds = cell_seeds(config.master_seed, cell.n, cell.trial);
    try {
      const Dataset data = sample_dataset(problem, static_cast<Eigen::Index>(cell.n), seeds.data);
      SolverConfig solver_config = config.solver_config;
      solver_config.seed = derive_seed(seeds.solver, config.solver_config.seed);
      Predictor predictor = fit(config.solver, data, config.kernel, solver_config);
      if (config.noise) predictor = qmodel::apply_noise(predictor, config.noise->at(cell.n, seeds.noise));
      const RiskEstimate est = excess_risk_paired(predictor, problem, config.n_eval, seeds.eval);
      cell.excess = est.value;
      cell.std_error = est.std_error;
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(total, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) run_cell(i);
      });
    }
  }
  return aggregate(config, std::move(cells));
}

Comparison compare_to_exact(std::string label, const SweepTable& exact, SweepTable noisy) {
  Comparison out;
  out.label = std::move(label);
  for (std::size_t i = 0; i < noisy.rows.size() && i < exact.rows.size(); ++i) {
    const SweepRow& a = noisy.rows[i];
    const SweepRow& b = exact.rows[i];
    RatioRow r;
    r.n = a.n;
    r.noisy = a.median;
    r.exact = b.median;
    r.ratio = a.median / b.median;
    r.mc_tolerance = 4.0 * std::hypot(a.median_std_error, b.median_std_error) / std::abs(b.median);
    out.ratios.push_back(r);
  }
  out.fit = try_fit(noisy.medians());
  out.table = std::move(noisy);
  return out;
}

MatchingReport matching_experiment(const MatchingConfig& config) {
  if (!(config.matched_scale >= 0.0) || !(config.constant_gamma >= 0.0)) {
    throw InvalidArgument("gamma schedule parameters must be >= 0");
  }
  NoiseSchedule matched;
  matched.gamma = {GammaRule::Kind::matched, config.matched_scale};
  NoiseSchedule constant;
  constant.gamma = {GammaRule::Kind::constant, config.constant_gamma};

  MatchingReport report;
  report.exact = sweep_excess_risk(with_noise(config.base, std::nullopt));
  report.exact_fit = try_fit(report.exact.medians());
  report.matched = compare_to_exact(fmt::format("matched_c0_{}", config.matched_scale), report.exact,
                                    sweep_excess_risk(with_noise(config.base, matched)));
  report.constant = compare_to_exact(fmt::format("constant_gamma_{}", config.constant_gamma), report.exact,
                                     sweep_excess_risk(with_noise(config.base, constant)));
  return report;
}

MeasurementReport measurement_experiment(const MeasurementConfig& config) {
  NoiseSchedule sqrt_rule;
  sqrt_rule.measurements.kind = MeasurementRule::Kind::sqrt_n;
  sqrt_rule.regime = config.regime;
  sqrt_rule.precision_constant = config.precision_constant;
  NoiseSchedule fourth_rule = sqrt_rule;
  fourth_rule.measurements.kind = MeasurementRule::Kind::fourth_root_n;

  MeasurementReport report;
  report.exact = sweep_excess_risk(with_noise(config.base, std::nullopt));
  report.exact_fit = try_fit(report.exact.medians());
  report.sqrt_rule = compare_to_exact("m_sqrt_n", report.exact, sweep_excess_risk(with_noise(config.base, sqrt_rule)));
  report.fourth_root_rule =
      compare_to_exact("m_fourth_root_n", report.exact, sweep_excess_risk(with_noise(config.base, fourth_rule)));
  return report;
}

void BenchmarkConfig::validate() const {
  if (solvers.empty()) throw InvalidArgument("benchmark needs at least one solver");
  if (n_grid.size() < 3) throw InvalidArgument("n_grid needs at least 3 entries");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw InvalidArgument("n_grid must be strictly increasing");
  }
  if (n_grid.front() < 1) throw InvalidArgument("n_grid entries must be >= 1");
  if (n_grid.back() > max_n) {
    throw InvalidArgument(fmt::format("n_max {} exceeds the benchmark cap {}", n_grid.back(), max_n));
  }
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (!(timeout_seconds > 0.0)) throw InvalidArgument("timeout must be > 0");
  if (n_test < 1) throw InvalidArgument("n_test must be >= 1");
}

bool BenchmarkReport::any_timeout() const {
  return std::any_of(rows.begin(), rows.end(), [](const BenchmarkRow& r) { return r.timed_out; });
}

BenchmarkReport runtime_benchmark(const BenchmarkConfig& config) {
  config.validate();
  const SyntheticProblem problem = sweep_problem(config.problem, config.seed);
  const Dataset test = sample_dataset(problem, static_cast<Eigen::Index>(config.n_test),
                                      derive_seed(config.seed, kTestStream));
  BenchmarkReport report;
  for (SolverKind solver : config.solvers) {
    bool skip_rest = false;
    std::vector<std::pair<double, double>> train_points;
    std::vector<std::pair<double, double>> test_points;
    for (std::size_t n : config.n_grid) {
      BenchmarkRow row;
      row.solver = solver;
      row.n = n;
      if (skip_rest) {
        row.timed_out = true;
        row.train_seconds = row.test_seconds = std::nan("");
        report.rows.push_back(row);
        continue;
      }
      const Dataset data = sample_dataset(problem, static_cast<Eigen::Index>(n), derive_seed(config.seed, n));
      std::vector<double> train_times;
      std::vector<double> test_times;
      for (std::size_t rep = 0; rep <= config.reps; ++rep) {
        std::optional<Predictor> predictor;
        const double train = time_seconds([&] { predictor = fit(solver, data, config.kernel, config.solver_config); });
        Eigen::VectorXd out;
        const double testing = time_seconds([&] { out = predictor->predict_rows(test.features); });
        if (train > config.timeout_seconds) {
          row.timed_out = true;
          skip_rest = true;
          break;
        }
        if (rep == 0) continue;  // warm-up
        train_times.push_back(train);
        test_times.push_back(testing);
      }
      row.reps_done = train_times.size();
      row.train_seconds = train_times.empty() ? std::nan("") : quantile(train_times, 0.5);
      row.test_seconds = test_times.empty() ? std::nan("") : quantile(test_times, 0.5);
      if (!row.timed_out) {
        train_points.emplace_back(static_cast<double>(n), row.train_seconds);
        test_points.emplace_back(static_cast<double>(n), row.test_seconds);
      }
      report.rows.push_back(row);
    }
    report.series.push_back({solver, try_fit(train_points), try_fit(test_points)});
  }
  return report;
}

}  // namespace statlim::scaling
