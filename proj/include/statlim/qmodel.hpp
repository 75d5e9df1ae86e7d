#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "statlim/predictor.hpp"
#include "statlim/synth.hpp"

namespace statlim::qmodel {

enum class PrecisionRegime { exact, shot_noise, heisenberg };

std::string_view to_string(PrecisionRegime regime);
PrecisionRegime parse_regime(std::string_view name);

/// Measurement error tau(m): a / sqrt(m) at the shot-noise limit, a / m at the
/// Heisenberg limit, 0 when read-out is exact.
double measurement_error(PrecisionRegime regime, std::size_t m, double a = 1.0);

/// Error budget of a simulated quantum least-squares solver.
struct NoiseModel {
  double gamma = 0.0;  // solver error ||w_tilde - w||
  PrecisionRegime regime = PrecisionRegime::exact;
  std::size_t measurements = 1;
  double precision_constant = 1.0;  // a in tau(m)
  std::uint64_t seed = 0;

  double tau() const { return measurement_error(regime, measurements, precision_constant); }
  void validate() const;
};

/// w + gamma u with u a seeded uniform unit direction, so ||result - w|| = gamma.
Eigen::VectorXd perturb_solution(const Eigen::VectorXd& w, double gamma, std::uint64_t seed);

/// w_tilde + tau(m) u, u drawn from noise.seed; the identity in the exact regime.
Eigen::VectorXd tomography_estimate(const Eigen::VectorXd& w_tilde, const NoiseModel& noise);

/// Applies solver error gamma and then read-out error tau(m) to a primal
/// predictor. The two directions come from the streams derive_seed(noise.seed, 0)
/// and derive_seed(noise.seed, 1).
Predictor apply_noise(const Predictor& exact, const NoiseModel& noise);

/// exact_ls followed by apply_noise.
Predictor quantum_ls_pipeline(const Dataset& data, double lambda, const NoiseModel& noise);

struct BoundCheck {
  double gap = 0.0;    // |E_hat(perturbed) - E_hat(exact)|
  double bound = 0.0;  // L * max_i ||x_i|| * gamma
  double lipschitz = 0.0;
  bool holds = true;
};

/// Empirical check of the Lipschitz/Cauchy-Schwarz chain
///   |E_hat(f_gamma) - E_hat(f)| <= L max_i ||x_i|| gamma,
/// with L = 2 max over both predictors of max_i |f(x_i) - y_i|, the Lipschitz
/// constant of the squared loss on the observed residual range.
/// Both predictors must be primal.
BoundCheck algorithmic_error_bound_check(const Dataset& data, const Predictor& exact, const Predictor& perturbed,
                                         double gamma);

// ---------------------------------------------------------------------------
// Cost models, in abstract operation units. Every polylog factor is the
// product of max(1, log2(arg)) over its arguments.

enum class Table1Entry { svm_krr, krr_fast, divide_conquer, nystrom, falkon, qkls_qklr, qsvm };

std::string_view to_string(Table1Entry entry);
Table1Entry parse_table1_entry(std::string_view name);
std::span<const Table1Entry> table1_entries();

struct Rational {
  int num = 0;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

std::string to_string(Rational r);

struct ComplexityRow {
  Table1Entry entry{};
  std::string_view algorithm;  // label as printed in the table
  Rational train_exp;
  Rational test_exp;
  bool is_quantum = false;
  // Quantum rows: the trained state cannot be copied, so every test round
  // retrains and test time carries a train-time factor.
  bool retrain_per_test_round = false;
};

/// Train/test exponents in n once generalisation error is matched to n^{-1/2}.
ComplexityRow table1_complexity(Table1Entry entry);

enum class CostAlgorithm { qkls_chakraborty, qls_schuld, matched_quantum, table1 };

std::string_view to_string(CostAlgorithm algorithm);
CostAlgorithm parse_cost_algorithm(std::string_view name);

struct CostModel {
  CostAlgorithm algorithm = CostAlgorithm::qkls_chakraborty;
  double kappa = 1.0;      // condition number
  double frobenius = 1.0;  // ||A||_F
  std::size_t n = 2;
  std::size_t d = 1;
  double gamma = 0.5;
  double beta = 3.0;  // matched_quantum: error exponent
  double c = 2.0;     // matched_quantum: condition-number exponent
  Table1Entry entry = Table1Entry::svm_krr;
};

/// ||A||_F kappa log2(n) log2(kappa + 1) log2(1/gamma); gamma in (0, 1).
double cost_qkls(const CostModel& model);
/// kappa^2 gamma^{-3} log2(n); gamma in (0, 1).
double cost_schuld(const CostModel& model);
/// kappa^c n^{beta/2} log2(n): the polynomial-error solver with gamma = n^{-1/2}.
double matched_cost(const CostModel& model);
/// Smallest m with tau(m) <= n^{-1/2} at a = 1: ceil(sqrt(n)) at the
/// Heisenberg limit, n at the shot-noise limit. Exact read-out is rejected.
std::size_t required_measurements(std::size_t n, PrecisionRegime regime);
/// Dispatches on model.algorithm; table1 evaluates n^{train_exp}.
double evaluate_cost(const CostModel& model);

}  // namespace statlim::qmodel
