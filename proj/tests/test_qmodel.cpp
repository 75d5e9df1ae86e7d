#include <doctest.h>

#include <cmath>

#include "statlim/errors.hpp"
#include "statlim/qmodel.hpp"
#include "statlim/random.hpp"
#include "statlim/risk.hpp"
#include "statlim/scaling.hpp"
#include "statlim/solvers.hpp"

using namespace statlim;
using namespace statlim::qmodel;

namespace {

CostModel model(CostAlgorithm a, double kappa, std::size_t n, double gamma, double frobenius = 1.0) {
  CostModel m;
  m.algorithm = a;
  m.kappa = kappa;
  m.n = n;
  m.gamma = gamma;
  m.frobenius = frobenius;
  return m;
}

NoiseModel noise(PrecisionRegime regime, std::size_t m, double gamma = 0.0, std::uint64_t seed = 1) {
  NoiseModel nm;
  nm.regime = regime;
  nm.measurements = m;
  nm.gamma = gamma;
  nm.seed = seed;
  return nm;
}

}  // namespace

TEST_CASE("measurement_error regimes") {
  CHECK(measurement_error(PrecisionRegime::exact, 10) == 0.0);
  CHECK(measurement_error(PrecisionRegime::shot_noise, 100) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(measurement_error(PrecisionRegime::heisenberg, 100) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(measurement_error(PrecisionRegime::shot_noise, 4, 3.0) == 1.5);
  for (std::size_t m = 1; m < 200; ++m) {
    CHECK(measurement_error(PrecisionRegime::heisenberg, m, 0.7) ==
          doctest::Approx(measurement_error(PrecisionRegime::shot_noise, m * m, 0.7)).epsilon(1e-15));
    CHECK(measurement_error(PrecisionRegime::shot_noise, m + 1) < measurement_error(PrecisionRegime::shot_noise, m));
    CHECK(measurement_error(PrecisionRegime::heisenberg, m + 1) < measurement_error(PrecisionRegime::heisenberg, m));
  }
  CHECK_THROWS_AS(measurement_error(PrecisionRegime::heisenberg, 0), InvalidArgument);
  CHECK_THROWS_AS(measurement_error(PrecisionRegime::heisenberg, 3, 0.0), InvalidArgument);
  for (PrecisionRegime r : {PrecisionRegime::exact, PrecisionRegime::shot_noise, PrecisionRegime::heisenberg}) {
    CHECK(parse_regime(to_string(r)) == r);
  }
  CHECK_THROWS_AS(parse_regime("sql"), InvalidArgument);
}

TEST_CASE("NoiseModel validation") {
  CHECK_NOTHROW(noise(PrecisionRegime::shot_noise, 3, 0.1).validate());
  CHECK_THROWS_AS(noise(PrecisionRegime::shot_noise, 3, -0.1).validate(), InvalidArgument);
  CHECK_THROWS_AS(noise(PrecisionRegime::shot_noise, 0).validate(), InvalidArgument);
}

TEST_CASE("perturb_solution: exact distance gamma") {
  const Eigen::Vector2d w(1.0, 0.0);
  CHECK(perturb_solution(w, 0.0, 3) == w);
  CHECK(perturb_solution(w, 0.1, 3) == perturb_solution(w, 0.1, 3));
  CHECK(perturb_solution(w, 0.1, 3) != perturb_solution(w, 0.1, 4));
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::VectorXd v = rng.unit_vector(7) * (1 + rep);
    const double gamma = rng.uniform() * 2.0;
    CHECK(std::abs((perturb_solution(v, gamma, rep) - v).norm() - gamma) <= 1e-12);
  }
  CHECK_THROWS_AS(perturb_solution(w, -0.1, 1), InvalidArgument);
}

TEST_CASE("tomography_estimate: exact distance tau") {
  const Eigen::Vector3d w(0.3, -1.0, 2.0);
  CHECK(tomography_estimate(w, noise(PrecisionRegime::exact, 5)) == w);
  CHECK(std::abs((tomography_estimate(w, noise(PrecisionRegime::shot_noise, 100)) - w).norm() - 0.1) <= 1e-12);
  CHECK(std::abs((tomography_estimate(w, noise(PrecisionRegime::heisenberg, 100)) - w).norm() - 0.01) <= 1e-12);
  for (std::size_t m = 1; m < 50; ++m) {
    const NoiseModel nm = noise(PrecisionRegime::shot_noise, m, 0.0, m);
    CHECK(std::abs((tomography_estimate(w, nm) - w).norm() - nm.tau()) <= 1e-12);
  }
}

TEST_CASE("quantum_ls_pipeline") {
  const auto p = make_problem(5, 0.5, InputLaw::unit_sphere, 3);
  const Dataset d = sample_dataset(p, 1024, 4);
  const Eigen::VectorXd w = exact_ls(d, 0.03).primal_form().weights;
  CHECK(quantum_ls_pipeline(d, 0.03, noise(PrecisionRegime::exact, 1, 0.0)).primal_form().weights == w);

  const NoiseModel nm = noise(PrecisionRegime::shot_noise, 16, 0.1, 9);
  const Predictor q = quantum_ls_pipeline(d, 0.03, nm);
  const Eigen::VectorXd wq = q.primal_form().weights;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd x = rng.unit_vector(5) * (0.1 + 3 * rng.uniform());
    CHECK(std::abs(wq.dot(x) - w.dot(x)) <= (nm.gamma + nm.tau()) * x.norm() * (1 + 1e-12));
  }
  CHECK(apply_noise(Predictor::primal(w), nm).primal_form().weights == wq);

  const Predictor g = quantum_ls_pipeline(d, 0.03, noise(PrecisionRegime::exact, 1, 0.1, 9));
  const Eigen::VectorXd wg = g.primal_form().weights;
  double k = 0.0;
  double rmax = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double xn = d.features.row(i).norm();
    k = std::max(k, 2.0 * std::abs(wg.dot(d.features.row(i)) - d.labels[i]) + 0.1 * xn);
    rmax = std::max(rmax, xn);
  }
  k *= 2.0 * rmax;
  const double gap = std::abs(empirical_risk(g, d) - empirical_risk(Predictor::primal(w), d));
  CHECK(gap <= k * 0.1);
}

TEST_CASE("apply_noise rejects dual predictors") {
  const Predictor dual = Predictor::dual(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 2), Kernel::linear());
  CHECK_THROWS_AS(apply_noise(dual, noise(PrecisionRegime::exact, 1, 0.1)), InvalidArgument);
}

TEST_CASE("algorithmic_error_bound_check") {
  const auto p = make_problem(10, 0.5, InputLaw::unit_sphere, 2);
  const Dataset d = sample_dataset(p, 512, 3);
  const Predictor exact = exact_ls(d, default_lambda(512));
  const Eigen::VectorXd w = exact.primal_form().weights;

  const BoundCheck zero = algorithmic_error_bound_check(d, exact, exact, 0.0);
  CHECK(zero.gap == 0.0);
  CHECK(zero.holds);

  for (std::uint64_t s = 0; s < 100; ++s) {
    const Predictor q = Predictor::primal(perturb_solution(w, 0.05, s));
    const BoundCheck b = algorithmic_error_bound_check(d, exact, q, 0.05);
    CHECK(b.holds);
    CHECK(b.gap <= b.bound);
    CHECK(b.lipschitz > 0.0);
  }

  std::vector<std::pair<double, double>> points;
  for (int k = 0; k <= 4; ++k) {
    const double gamma = std::pow(10.0, -3.0 + 0.5 * k);
    double max_gap = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const Predictor q = Predictor::primal(perturb_solution(w, gamma, derive_seed(k, s)));
      max_gap = std::max(max_gap, algorithmic_error_bound_check(d, exact, q, gamma).gap);
    }
    points.emplace_back(gamma, max_gap);
  }
  CHECK(std::abs(scaling::fit_scaling(points).exponent - 1.0) <= 0.1);

  const Predictor dual = krr(d, Kernel::linear(), 0.1);
  CHECK_THROWS_AS(algorithmic_error_bound_check(d, dual, exact, 0.1), InvalidArgument);
}

TEST_CASE("cost_qkls") {
  CHECK(cost_qkls(model(CostAlgorithm::qkls_chakraborty, 1, 2, 0.5)) == 1.0);
  const double big = cost_qkls(model(CostAlgorithm::qkls_chakraborty, 10, 4096, std::pow(2.0, -6), 64.0));
  CHECK(big == doctest::Approx(64 * 10 * 12 * std::log2(11.0) * 6).epsilon(1e-12));
  CHECK(big == doctest::Approx(1.6e5).epsilon(0.01));
  const double c10 = cost_qkls(model(CostAlgorithm::qkls_chakraborty, 10, 64, 0.1));
  const double c20 = cost_qkls(model(CostAlgorithm::qkls_chakraborty, 20, 64, 0.1));
  CHECK(c20 > 2.0 * c10);
  CHECK(c20 < 2.0 * c10 * std::log2(21.0) / std::log2(11.0) * (1 + 1e-12));
  CHECK_THROWS_AS(cost_qkls(model(CostAlgorithm::qkls_chakraborty, 1, 2, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(cost_qkls(model(CostAlgorithm::qkls_chakraborty, 1, 2, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(cost_qkls(model(CostAlgorithm::qkls_chakraborty, 0.5, 2, 0.5)), InvalidArgument);
}

TEST_CASE("cost_schuld") {
  CHECK(cost_schuld(model(CostAlgorithm::qls_schuld, 1, 2, 0.5)) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(cost_schuld(model(CostAlgorithm::qls_schuld, 2, 1024, 0.1)) == doctest::Approx(4e4).epsilon(1e-12));
  CHECK(cost_schuld(model(CostAlgorithm::qls_schuld, 3, 100, 0.05)) ==
        doctest::Approx(8 * cost_schuld(model(CostAlgorithm::qls_schuld, 3, 100, 0.1))).epsilon(1e-12));
  CHECK_THROWS_AS(cost_schuld(model(CostAlgorithm::qls_schuld, 1, 2, 1.0)), InvalidArgument);
}

TEST_CASE("matched_cost") {
  CostModel m = model(CostAlgorithm::matched_quantum, 1, 2, 0.5);
  m.beta = 3;
  CHECK(matched_cost(m) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-15));
  m.beta = 4;
  m.n = 16;
  CHECK(matched_cost(m) == doctest::Approx(1024.0).epsilon(1e-15));
  CHECK_THROWS_AS([&] {
    CostModel bad = m;
    bad.beta = 0;
    return matched_cost(bad);
  }(), InvalidArgument);
}

TEST_CASE("matched_cost equals cost_schuld at gamma = n^{-1/2}") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const double kappa = 1.0 + 20.0 * rng.uniform();
    const std::size_t n = 4 + rng.below(100000);
    CostModel m = model(CostAlgorithm::matched_quantum, kappa, n, 1.0 / std::sqrt(static_cast<double>(n)));
    m.beta = 3;
    m.c = 2;
    CHECK(matched_cost(m) == doctest::Approx(cost_schuld(m)).epsilon(1e-12));
  }
}

TEST_CASE("cost functions are increasing in kappa and 1/gamma, matched in n") {
  for (CostAlgorithm a : {CostAlgorithm::qkls_chakraborty, CostAlgorithm::qls_schuld}) {
    double prev = 0.0;
    for (double kappa : {1.0, 1.5, 2.0, 4.0, 10.0, 100.0}) {
      const double c = evaluate_cost(model(a, kappa, 256, 0.1));
      CHECK(c > prev);
      prev = c;
    }
    prev = 0.0;
    for (double gamma : {0.5, 0.3, 0.1, 0.01, 1e-4}) {
      const double c = evaluate_cost(model(a, 3.0, 256, gamma));
      CHECK(c > prev);
      prev = c;
    }
    // The log factors are floored at 1, so cost is flat in 1/gamma above gamma = 1/2.
    CHECK(evaluate_cost(model(a, 3.0, 256, 0.9)) <= evaluate_cost(model(a, 3.0, 256, 0.5)));
  }
  double prev = 0.0;
  for (std::size_t n : {2, 3, 8, 100, 5000}) {
    const double c = matched_cost(model(CostAlgorithm::matched_quantum, 2.0, n, 0.5));
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("required_measurements") {
  CHECK(required_measurements(10000, PrecisionRegime::heisenberg) == 100);
  CHECK(required_measurements(10000, PrecisionRegime::shot_noise) == 10000);
  CHECK(required_measurements(1, PrecisionRegime::heisenberg) == 1);
  CHECK(required_measurements(1, PrecisionRegime::shot_noise) == 1);
  CHECK(required_measurements(10001, PrecisionRegime::heisenberg) == 101);
  CHECK_THROWS_AS(required_measurements(10, PrecisionRegime::exact), InvalidArgument);
  CHECK_THROWS_AS(required_measurements(0, PrecisionRegime::heisenberg), InvalidArgument);
  for (std::size_t n : {2, 17, 1000, 4097}) {
    for (PrecisionRegime r : {PrecisionRegime::shot_noise, PrecisionRegime::heisenberg}) {
      const std::size_t m = required_measurements(n, r);
      CHECK(measurement_error(r, m) <= 1.0 / std::sqrt(static_cast<double>(n)) * (1 + 1e-15));
      CHECK(measurement_error(r, m - 1 == 0 ? 1 : m - 1) >= 1.0 / std::sqrt(static_cast<double>(n)) * (1 - 1e-15));
    }
  }
}

TEST_CASE("table1_complexity snapshot") {
  struct Expected {
    Table1Entry entry;
    Rational train;
    Rational test;
    bool quantum;
  };
  const Expected rows[] = {
      {Table1Entry::svm_krr, {3, 1}, {1, 1}, false},       {Table1Entry::krr_fast, {2, 1}, {1, 1}, false},
      {Table1Entry::divide_conquer, {2, 1}, {1, 1}, false}, {Table1Entry::nystrom, {2, 1}, {1, 2}, false},
      {Table1Entry::falkon, {3, 2}, {1, 2}, false},         {Table1Entry::qkls_qklr, {1, 2}, {3, 2}, true},
      {Table1Entry::qsvm, {3, 2}, {5, 2}, true},
  };
  REQUIRE(table1_entries().size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(table1_entries()[i] == rows[i].entry);
    const ComplexityRow r = table1_complexity(rows[i].entry);
    CHECK(r.entry == rows[i].entry);
    CHECK(r.train_exp == rows[i].train);
    CHECK(r.test_exp == rows[i].test);
    CHECK(r.is_quantum == rows[i].quantum);
    CHECK(r.retrain_per_test_round == rows[i].quantum);
    CHECK(parse_table1_entry(to_string(rows[i].entry)) == rows[i].entry);
  }
  CHECK(table1_complexity(Table1Entry::falkon).train_exp.value() == 1.5);
  CHECK(table1_complexity(Table1Entry::qkls_qklr).test_exp.value() == 1.5);
  CHECK(to_string(Rational{3, 2}) == "3/2");
  CHECK(to_string(Rational{3, 1}) == "3");
  CHECK_THROWS_AS(parse_table1_entry("random_features"), InvalidArgument);
}

TEST_CASE("evaluate_cost dispatch") {
  CostModel m = model(CostAlgorithm::table1, 1, 1024, 0.5);
  m.entry = Table1Entry::falkon;
  CHECK(evaluate_cost(m) == doctest::Approx(std::pow(1024.0, 1.5)).epsilon(1e-15));
  CHECK(evaluate_cost(model(CostAlgorithm::qls_schuld, 2, 1024, 0.1)) == doctest::Approx(4e4).epsilon(1e-12));
  for (CostAlgorithm a : {CostAlgorithm::qkls_chakraborty, CostAlgorithm::qls_schuld, CostAlgorithm::matched_quantum,
                          CostAlgorithm::table1}) {
    CHECK(parse_cost_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_cost_algorithm("hhl"), InvalidArgument);
}
