#include "statlim/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "config.hpp"
#include "statlim/criteria.hpp"
#include "statlim/io.hpp"
#include "statlim/qmodel.hpp"
#include "statlim/random.hpp"
#include "statlim/risk.hpp"
#include "statlim/scaling.hpp"
#include "statlim/solvers.hpp"

namespace statlim::cli {

namespace {

constexpr std::size_t kDefaultBenchCap = 8192;

struct Options {
  std::optional<std::size_t> workers;
};

std::optional<std::size_t> env_count(const char* name) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || v == 0) throw ConfigError(fmt::format("environment variable {} must be a positive integer", name));
  return static_cast<std::size_t>(v);
}

template <typename Enum, typename Parse>
Enum parse_field(Fields& f, std::string_view key, std::string fallback, Parse parse) {
  const std::string name = f.text(key, std::move(fallback));
  try {
    return parse(name);
  } catch (const InvalidArgument& e) {
    f.fail(key, e.what());
  }
}

// generate/fit problem: make_problem(d, sigma, law, derive_seed(seed, 0)).
SyntheticProblem read_problem(Fields& f) {
  const auto d = static_cast<Eigen::Index>(f.positive_count("d"));
  const double sigma = f.nonnegative("sigma", 0.0);
  const InputLaw law = parse_field<InputLaw>(f, "input_law", "unit_sphere", parse_input_law);
  const std::uint64_t seed = f.seed("seed", 0);
  return make_problem(d, sigma, law, derive_seed(seed, 0));
}

scaling::ProblemSpec read_problem_spec(Fields f) {
  scaling::ProblemSpec spec;
  spec.d = static_cast<Eigen::Index>(f.positive_count("d", 10));
  spec.sigma = f.nonnegative("sigma", 0.5);
  spec.input_law = parse_field<InputLaw>(f, "input_law", "unit_sphere", parse_input_law);
  f.finish();
  return spec;
}

struct SolverChoice {
  SolverKind kind = SolverKind::exact_ls;
  Kernel kernel;
  SolverConfig config;
};

SolverChoice read_solver(Fields& f, std::string default_solver, std::string default_kernel) {
  SolverChoice s;
  s.kind = parse_field<SolverKind>(f, "solver", std::move(default_solver), parse_solver_kind);
  const Kernel::Kind kind = parse_field<Kernel::Kind>(f, "kernel", std::move(default_kernel), parse_kernel_kind);
  const double bandwidth = f.positive("bandwidth", 1.0);
  s.kernel = kind == Kernel::Kind::linear ? Kernel::linear() : Kernel::gaussian(bandwidth);
  if (auto lambda = f.optional_number("lambda")) {
    if (*lambda < 0.0) f.fail("lambda", "must be >= 0");
    s.config.lambda = *lambda;
  }
  if (auto step = f.optional_number("step_size")) {
    if (!(*step > 0.0)) f.fail("step_size", "must be > 0");
    s.config.step_size = *step;
  }
  s.config.max_iters = f.optional_count("max_iters");
  s.config.partitions = f.positive_count("partitions", 1);
  s.config.landmarks = f.optional_count("landmarks");
  if (s.config.landmarks && *s.config.landmarks == 0) f.fail("landmarks", "must be a positive integer");
  s.config.seed = f.seed("solver_seed", 0);
  s.config.shuffle = f.flag("shuffle", true);
  return s;
}

std::size_t resolve_workers(Fields& f, const Options& opts) {
  const std::optional<std::size_t> from_config = f.optional_count("workers");
  if (opts.workers) return std::max<std::size_t>(1, *opts.workers);
  if (from_config) return std::max<std::size_t>(1, *from_config);
  if (auto env = env_count("STATLIM_WORKERS")) return *env;
  return std::max(1u, std::thread::hardware_concurrency());
}

io::json vector_json(const Eigen::VectorXd& v) {
  io::json a = io::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

io::json optional_fit(const std::optional<scaling::ScalingFit>& fit) {
  return fit ? io::fit_to_json(*fit) : io::json(nullptr);
}

io::json ratios_json(const scaling::Comparison& c) {
  io::json rows = io::json::array();
  for (const scaling::RatioRow& r : c.ratios) {
    rows.push_back({{"n", r.n},
                    {"noisy", r.noisy},
                    {"exact", r.exact},
                    {"ratio", r.ratio},
                    {"mc_tolerance", r.mc_tolerance},
                    {"within_budget", r.ratio <= criteria::kMatchedMaxRatio}});
  }
  return rows;
}

bool all_within(const scaling::Comparison& c, double max_ratio) {
  if (c.ratios.empty()) return false;
  for (const scaling::RatioRow& r : c.ratios) {
    if (!(r.ratio <= max_ratio)) return false;
  }
  return true;
}

void write_json(const std::string& path, const io::json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

int cmd_generate(Fields& f, std::ostream& out) {
  const SyntheticProblem problem = read_problem(f);
  const auto n = static_cast<Eigen::Index>(f.positive_count("n"));
  const std::string output = f.text("output");
  f.finish();
  const std::uint64_t seed = f.seed("seed", 0);
  const Dataset data = sample_dataset(problem, n, derive_seed(seed, 1));
  io::save_dataset(data, output);
  const io::json echo = {{"schema_version", io::kSchemaVersion},
                         {"command", "generate"},
                         {"d", problem.dimension()},
                         {"n", n},
                         {"sigma", problem.sigma},
                         {"input_law", std::string(to_string(problem.input_law))},
                         {"seed", seed},
                         {"output", output},
                         {"w_star", vector_json(problem.w_star)},
                         {"bayes_risk", problem.bayes_risk()},
                         {"max_input_norm", problem.max_input_norm()}};
  write_json(output + ".config.json", echo);
  out << fmt::format("wrote {} samples (d = {}) to {}\n", n, problem.dimension(), output);
  return kExitOk;
}

int cmd_fit(Fields& f, std::ostream& out) {
  const std::string data_path = f.text("data");
  SolverChoice solver = read_solver(f, "exact_ls", "linear");
  const std::string predictor_out = f.text("predictor_out", data_path + ".predictor.json");
  const std::string report_out = f.text("report_out", data_path + ".report.json");
  const std::size_t n_eval = f.positive_count("n_eval", 100000);
  const std::uint64_t eval_seed = f.seed("eval_seed", 0);
  std::optional<SyntheticProblem> problem;
  if (f.has("problem")) {
    Fields pf = f.object("problem");
    problem = read_problem(pf);
    pf.finish();
  }
  f.finish();
  if (n_eval < 2) f.fail("n_eval", "must be >= 2");

  const Dataset data = io::load_dataset(data_path);
  if (problem && problem->dimension() != data.dimension()) {
    f.fail("problem.d", fmt::format("does not match dataset dimension {}", data.dimension()));
  }
  const Predictor predictor = fit(solver.kind, data, solver.kernel, solver.config);
  write_json(predictor_out, io::predictor_to_json(predictor));

  io::json report = {{"schema_version", io::kSchemaVersion},
                     {"command", "fit"},
                     {"solver", std::string(to_string(solver.kind))},
                     {"n", data.size()},
                     {"d", data.dimension()},
                     {"lambda", solver.config.lambda_for(data.size())},
                     {"empirical_risk", empirical_risk(predictor, data)}};
  if (problem) {
    const RiskEstimate expected = expected_risk_mc(predictor, *problem, n_eval, eval_seed);
    report["bayes_risk"] = problem->bayes_risk();
    report["expected_risk"] = io::risk_to_json(expected);
    report["excess_risk"] = expected.value - problem->bayes_risk();
    report["excess_risk_paired"] = io::risk_to_json(excess_risk_paired(predictor, *problem, n_eval, eval_seed));
  }
  write_json(report_out, report);
  out << fmt::format("{}: empirical risk {}\n", to_string(solver.kind),
                     io::format_double(report["empirical_risk"].get<double>()));
  return kExitOk;
}

scaling::SweepConfig read_sweep_config(Fields& f, const Options& opts) {
  scaling::SweepConfig c;
  c.n_grid = f.positive_counts("n_grid", std::vector<std::size_t>{64, 128, 256, 512, 1024, 2048, 4096, 8192});
  c.trials = f.positive_count("trials", 20);
  SolverChoice solver = read_solver(f, "exact_ls", "linear");
  c.solver = solver.kind;
  c.kernel = solver.kernel;
  c.solver_config = solver.config;
  c.problem = read_problem_spec(f.object("problem"));
  c.master_seed = f.seed("master_seed", 0);
  c.n_eval = f.positive_count("n_eval", 100000);
  c.workers = resolve_workers(f, opts);
  return c;
}

std::optional<scaling::NoiseSchedule> read_noise(Fields& f) {
  if (!f.has("noise")) {
    f.raw("noise");
    return std::nullopt;
  }
  Fields nf = f.object("noise");
  scaling::NoiseSchedule s;
  {
    Fields g = nf.object("gamma_rule");
    const std::string kind = g.text("kind", "constant");
    if (kind == "constant") {
      s.gamma.kind = scaling::GammaRule::Kind::constant;
    } else if (kind == "matched") {
      s.gamma.kind = scaling::GammaRule::Kind::matched;
    } else {
      g.fail("kind", "expected 'constant' or 'matched'");
    }
    s.gamma.value = g.nonnegative("value", 0.0);
    g.finish();
  }
  {
    Fields m = nf.object("m_rule");
    const std::string kind = m.text("kind", "fixed");
    using K = scaling::MeasurementRule::Kind;
    if (kind == "fixed") {
      s.measurements.kind = K::fixed;
    } else if (kind == "sqrt_n") {
      s.measurements.kind = K::sqrt_n;
    } else if (kind == "fourth_root_n") {
      s.measurements.kind = K::fourth_root_n;
    } else if (kind == "n") {
      s.measurements.kind = K::linear_n;
    } else {
      m.fail("kind", "expected 'fixed', 'sqrt_n', 'fourth_root_n' or 'n'");
    }
    s.measurements.fixed_m = m.positive_count("m", 1);
    m.finish();
  }
  s.regime = parse_field<qmodel::PrecisionRegime>(nf, "regime", "exact", qmodel::parse_regime);
  s.precision_constant = nf.positive("a", 1.0);
  nf.finish();
  return s;
}

int cmd_sweep(Fields& f, std::ostream& out, const Options& opts) {
  const std::string experiment = f.text("experiment", "estimation");
  scaling::SweepConfig base = read_sweep_config(f, opts);
  const std::string out_csv = f.text("out_csv", "sweep_report.csv");
  const std::string out_json = f.text("out_json", "sweep_summary.json");

  io::json summary = {{"schema_version", io::kSchemaVersion},
                      {"command", "sweep"},
                      {"experiment", experiment},
                      {"master_seed", base.master_seed},
                      {"n_grid", base.n_grid},
                      {"trials", base.trials},
                      {"solver", std::string(to_string(base.solver))}};
  std::ostringstream csv;
  io::write_report_header(csv);

  if (experiment == "estimation") {
    base.noise = read_noise(f);
    f.finish();
    base.validate();
    const scaling::SweepTable table = scaling::sweep_excess_risk(base);
    io::write_sweep_rows(csv, base.noise ? "noisy" : "exact", table);
    std::optional<scaling::ScalingFit> fit;
    const auto medians = table.medians();
    if (medians.size() >= 3 && std::all_of(medians.begin(), medians.end(), [](auto& p) { return p.second > 0.0; })) {
      fit = scaling::fit_scaling(medians);
    }
    summary["failures"] = table.failures();
    summary["fit"] = optional_fit(fit);
    summary["rate_ok"] = fit && fit->exponent >= criteria::kRateExponentMin &&
                         fit->exponent <= criteria::kRateExponentMax && fit->r_squared >= criteria::kRateMinRSquared;
    summary["thresholds"] = {{"exponent_min", criteria::kRateExponentMin},
                             {"exponent_max", criteria::kRateExponentMax},
                             {"r_squared_min", criteria::kRateMinRSquared}};
  } else if (experiment == "matching") {
    scaling::MatchingConfig mc;
    mc.matched_scale = f.nonnegative("matched_scale", 0.1);
    mc.constant_gamma = f.nonnegative("constant_gamma", 0.3);
    f.finish();
    base.validate();
    mc.base = base;
    const scaling::MatchingReport r = scaling::matching_experiment(mc);
    io::write_sweep_rows(csv, "exact", r.exact);
    io::write_sweep_rows(csv, r.matched.label, r.matched.table);
    io::write_sweep_rows(csv, r.constant.label, r.constant.table);
    io::write_ratio_rows(csv, r.matched, criteria::kMatchedMaxRatio);
    io::write_ratio_rows(csv, r.constant, criteria::kMatchedMaxRatio);
    const double last_ratio = r.constant.ratios.empty() ? 0.0 : r.constant.ratios.back().ratio;
    summary["exact_fit"] = optional_fit(r.exact_fit);
    summary["matched"] = {{"c0", mc.matched_scale}, {"ratios", ratios_json(r.matched)}, {"fit", optional_fit(r.matched.fit)}};
    summary["constant"] = {{"gamma", mc.constant_gamma},
                           {"ratios", ratios_json(r.constant)},
                           {"ratio_at_n_max", last_ratio},
                           {"fit", optional_fit(r.constant.fit)}};
    summary["matched_ok"] = all_within(r.matched, criteria::kMatchedMaxRatio);
    summary["constant_ok"] = last_ratio >= criteria::kConstantMinRatio;
    summary["failures"] = r.exact.failures() + r.matched.table.failures() + r.constant.table.failures();
  } else if (experiment == "measurement") {
    scaling::MeasurementConfig mc;
    mc.regime = parse_field<qmodel::PrecisionRegime>(f, "regime", "heisenberg", qmodel::parse_regime);
    mc.precision_constant = f.positive("a", 1.0);
    f.finish();
    base.validate();
    mc.base = base;
    const scaling::MeasurementReport r = scaling::measurement_experiment(mc);
    io::write_sweep_rows(csv, "exact", r.exact);
    io::write_sweep_rows(csv, r.sqrt_rule.label, r.sqrt_rule.table);
    io::write_sweep_rows(csv, r.fourth_root_rule.label, r.fourth_root_rule.table);
    io::write_ratio_rows(csv, r.sqrt_rule, criteria::kMatchedMaxRatio);
    io::write_ratio_rows(csv, r.fourth_root_rule, criteria::kMatchedMaxRatio);
    summary["regime"] = std::string(qmodel::to_string(mc.regime));
    summary["exact_fit"] = optional_fit(r.exact_fit);
    summary["sqrt_n"] = {{"ratios", ratios_json(r.sqrt_rule)}, {"fit", optional_fit(r.sqrt_rule.fit)}};
    summary["fourth_root_n"] = {{"ratios", ratios_json(r.fourth_root_rule)},
                                {"fit", optional_fit(r.fourth_root_rule.fit)}};
    summary["sqrt_ok"] = all_within(r.sqrt_rule, criteria::kMatchedMaxRatio);
    summary["fourth_root_ok"] = r.fourth_root_rule.fit && r.fourth_root_rule.fit->exponent >= criteria::kDegradedMinExponent;
    summary["failures"] = r.exact.failures() + r.sqrt_rule.table.failures() + r.fourth_root_rule.table.failures();
  } else {
    f.fail("experiment", "expected 'estimation', 'matching' or 'measurement'");
  }

  io::write_text_file(out_csv, csv.str());
  write_json(out_json, summary);
  out << fmt::format("sweep '{}' written to {} and {}\n", experiment, out_csv, out_json);
  return kExitOk;
}

int cmd_cost(Fields& f, std::ostream& out) {
  const qmodel::CostAlgorithm algorithm =
      parse_field<qmodel::CostAlgorithm>(f, "algorithm", "table1", qmodel::parse_cost_algorithm);
  const std::optional<std::string> output = f.optional_text("output");
  std::ostringstream csv;
  if (algorithm == qmodel::CostAlgorithm::table1) {
    f.finish();
    io::write_table1_csv(csv);
  } else {
    const std::vector<double> kappas = f.numbers("kappa", std::vector<double>{1.0});
    const std::vector<double> gammas = f.numbers("gamma", std::vector<double>{0.5});
    const std::vector<std::size_t> ns = f.positive_counts("n", std::vector<std::size_t>{2});
    double frobenius = 1.0;
    bool frobenius_sqrt_n = false;
    if (const io::json* raw = f.raw("frobenius")) {
      if (raw->is_number()) {
        frobenius = raw->get<double>();
        if (!(frobenius > 0.0)) f.fail("frobenius", "must be > 0");
      } else if (raw->is_string() && raw->get<std::string>() == "sqrt_n") {
        frobenius_sqrt_n = true;
      } else {
        f.fail("frobenius", "expected a number or \"sqrt_n\"");
      }
    }
    qmodel::CostModel model;
    model.algorithm = algorithm;
    model.beta = f.positive("beta", 3.0);
    model.c = f.positive("c", 2.0);
    model.d = f.positive_count("d", 1);
    f.finish();
    io::write_cost_header(csv);
    for (std::size_t n : ns) {
      for (double kappa : kappas) {
        for (double gamma : gammas) {
          model.n = n;
          model.kappa = kappa;
          model.gamma = gamma;
          model.frobenius = frobenius_sqrt_n ? std::sqrt(static_cast<double>(n)) : frobenius;
          io::write_cost_row(csv, model, qmodel::evaluate_cost(model));
        }
      }
    }
  }
  if (output) {
    io::write_text_file(*output, csv.str());
  } else {
    out << csv.str();
  }
  return kExitOk;
}

int cmd_bench(Fields& f, std::ostream& out, std::ostream& err) {
  scaling::BenchmarkConfig c;
  for (const std::string& name : f.texts("solvers", std::vector<std::string>{"krr", "nystrom"})) {
    try {
      c.solvers.push_back(parse_solver_kind(name));
    } catch (const InvalidArgument& e) {
      f.fail("solvers", e.what());
    }
  }
  c.n_grid = f.positive_counts("n_grid", std::vector<std::size_t>{256, 512, 1024, 2048, 4096});
  c.reps = f.positive_count("reps", 5);
  c.timeout_seconds = f.positive("timeout_s", 120.0);
  c.problem = read_problem_spec(f.object("problem"));
  SolverChoice solver = read_solver(f, "krr", "gaussian");
  c.kernel = solver.kernel;
  c.solver_config = solver.config;
  c.n_test = f.positive_count("n_test", 1000);
  c.seed = f.seed("seed", 0);
  const std::string out_csv = f.text("out_csv", "bench_report.csv");
  const std::string out_json = f.text("out_json", "bench_summary.json");
  if (f.raw("workers")) f.fail("workers", "benchmarks always run serially");
  f.finish();
  c.max_n = env_count("STATLIM_BENCH_CAP").value_or(kDefaultBenchCap);
  c.validate();
  if (c.reps == 1) err << "warning: reps = 1, medians are single measurements\n";

  const scaling::BenchmarkReport report = scaling::runtime_benchmark(c);
  std::ostringstream csv;
  io::write_report_header(csv);
  for (const scaling::BenchmarkRow& r : report.rows) {
    const std::string series(to_string(r.solver));
    io::write_report_row(csv, series, r.n, "train_seconds", r.train_seconds);
    io::write_report_row(csv, series, r.n, "test_seconds", r.test_seconds);
    io::write_report_row(csv, series, r.n, "reps", static_cast<double>(r.reps_done));
    io::write_report_row(csv, series, r.n, "timed_out", r.timed_out ? 1.0 : 0.0);
  }
  io::json fits = io::json::object();
  std::optional<double> krr_exp;
  std::optional<double> nystrom_exp;
  for (const scaling::BenchmarkSeries& s : report.series) {
    fits[std::string(to_string(s.solver))] = {{"train", optional_fit(s.train_fit)}, {"test", optional_fit(s.test_fit)}};
    if (s.solver == SolverKind::krr && s.train_fit) krr_exp = s.train_fit->exponent;
    if (s.solver == SolverKind::nystrom && s.train_fit) nystrom_exp = s.train_fit->exponent;
  }
  io::json summary = {{"schema_version", io::kSchemaVersion},
                      {"command", "bench"},
                      {"n_grid", c.n_grid},
                      {"reps", c.reps},
                      {"fits", fits},
                      {"any_timeout", report.any_timeout()}};
  if (krr_exp) {
    summary["krr_exponent_ok"] =
        *krr_exp >= criteria::kKrrTrainExponentMin && *krr_exp <= criteria::kKrrTrainExponentMax;
  }
  if (krr_exp && nystrom_exp) summary["ladder_ok"] = *nystrom_exp <= *krr_exp - criteria::kNystromExponentGap;
  io::write_text_file(out_csv, csv.str());
  write_json(out_json, summary);
  out << fmt::format("benchmark written to {} and {}\n", out_csv, out_json);
  if (report.any_timeout()) {
    err << "error: at least one benchmark cell timed out\n";
    return kExitTimeout;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistical-limit laboratory for classical and simulated quantum regression solvers", "statlim"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  Options opts;
  std::size_t workers_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Override a config field, key=value (dotted keys for nested fields)");
  };
  CLI::App* generate = app.add_subcommand("generate", "Sample a synthetic dataset to CSV");
  CLI::App* fit_cmd = app.add_subcommand("fit", "Train a solver on a dataset CSV");
  CLI::App* sweep = app.add_subcommand("sweep", "Run an excess-risk scaling experiment");
  CLI::App* cost = app.add_subcommand("cost", "Evaluate runtime cost models");
  CLI::App* bench = app.add_subcommand("bench", "Time solvers over a grid of n (serial)");
  for (CLI::App* sub : {generate, fit_cmd, sweep, cost, bench}) add_common(sub);
  sweep->add_option("-j,--workers", workers_flag, "Worker threads for independent trials");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (workers_flag > 0) opts.workers = workers_flag;

  try {
    json root = config_path.empty() ? json::object() : load_config_file(config_path);
    for (const std::string& s : sets) apply_override(root, s);
    Fields fields(root, "");
    if (generate->parsed()) return cmd_generate(fields, out);
    if (fit_cmd->parsed()) return cmd_fit(fields, out);
    if (sweep->parsed()) return cmd_sweep(fields, out, opts);
    if (cost->parsed()) return cmd_cost(fields, out);
    if (bench->parsed()) return cmd_bench(fields, out, err);
    return kExitConfig;
  } catch (const TimeoutError& e) {
    err << "error: " << e.what() << '\n';
    return kExitTimeout;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace statlim::cli
