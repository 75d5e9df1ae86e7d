#include "statlim/qmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "statlim/errors.hpp"
#include "statlim/random.hpp"
#include "statlim/risk.hpp"
#include "statlim/solvers.hpp"

namespace statlim::qmodel {

namespace {

double lg(double x) { return std::max(1.0, std::log2(x)); }

void check_cost_model(const CostModel& m) {
  if (!(m.kappa >= 1.0) || !std::isfinite(m.kappa)) throw InvalidArgument("kappa must be >= 1");
  if (m.n < 1) throw InvalidArgument("n must be >= 1");
  if (m.d < 1) throw InvalidArgument("d must be >= 1");
}

void check_gamma_open_unit(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument(fmt::format("gamma must lie in (0, 1), got {}", gamma));
  }
}

constexpr std::array<Table1Entry, 7> kEntries = {Table1Entry::svm_krr,   Table1Entry::krr_fast,
                                                 Table1Entry::divide_conquer, Table1Entry::nystrom,
                                                 Table1Entry::falkon,    Table1Entry::qkls_qklr,
                                                 Table1Entry::qsvm};

}  // namespace

std::string_view to_string(PrecisionRegime regime) {
  switch (regime) {
    case PrecisionRegime::exact:
      return "exact";
    case PrecisionRegime::shot_noise:
      return "shot_noise";
    case PrecisionRegime::heisenberg:
      return "heisenberg";
  }
  return "unknown";
}

PrecisionRegime parse_regime(std::string_view name) {
  if (name == "exact") return PrecisionRegime::exact;
  if (name == "shot_noise") return PrecisionRegime::shot_noise;
  if (name == "heisenberg") return PrecisionRegime::heisenberg;
  throw InvalidArgument("unknown precision regime '" + std::string(name) + "'");
}

double measurement_error(PrecisionRegime regime, std::size_t m, double a) {
  if (m < 1) throw InvalidArgument("measurement count must be >= 1");
  if (!(a > 0.0)) throw InvalidArgument("precision constant must be > 0");
  const auto md = static_cast<double>(m);
  switch (regime) {
    case PrecisionRegime::exact:
      return 0.0;
    case PrecisionRegime::shot_noise:
      return a / std::sqrt(md);
    case PrecisionRegime::heisenberg:
      return a / md;
  }
  return 0.0;
}

void NoiseModel::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be finite and >= 0");
  if (measurements < 1) throw InvalidArgument("measurement count must be >= 1");
  if (!(precision_constant > 0.0)) throw InvalidArgument("precision constant must be > 0");
}

Eigen::VectorXd perturb_solution(const Eigen::VectorXd& w, double gamma, std::uint64_t seed) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be finite and >= 0");
  if (gamma == 0.0 || w.size() == 0) return w;
  Rng rng(seed);
  return w + gamma * rng.unit_vector(w.size());
}

Eigen::VectorXd tomography_estimate(const Eigen::VectorXd& w_tilde, const NoiseModel& noise) {
  noise.validate();
  const double tau = noise.tau();
  if (tau == 0.0 || w_tilde.size() == 0) return w_tilde;
  Rng rng(noise.seed);
  return w_tilde + tau * rng.unit_vector(w_tilde.size());
}

Predictor apply_noise(const Predictor& exact, const NoiseModel& noise) {
  noise.validate();
  if (!exact.is_primal()) throw InvalidArgument("solver noise applies to primal predictors only");
  const Eigen::VectorXd w_tilde = perturb_solution(exact.primal_form().weights, noise.gamma, derive_seed(noise.seed, 0));
  NoiseModel readout = noise;
  readout.seed = derive_seed(noise.seed, 1);
  return Predictor::primal(tomography_estimate(w_tilde, readout));
}

Predictor quantum_ls_pipeline(const Dataset& data, double lambda, const NoiseModel& noise) {
  noise.validate();
  return apply_noise(exact_ls(data, lambda), noise);
}

BoundCheck algorithmic_error_bound_check(const Dataset& data, const Predictor& exact, const Predictor& perturbed,
                                         double gamma) {
  if (!exact.is_primal() || !perturbed.is_primal()) {
    throw InvalidArgument("bound check requires primal predictors");
  }
  if (exact.dimension() != perturbed.dimension()) {
    throw DimensionMismatch(static_cast<std::size_t>(exact.dimension()),
                            static_cast<std::size_t>(perturbed.dimension()));
  }
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  const Eigen::VectorXd r_exact = exact.predict_rows(data.features) - data.labels;
  const Eigen::VectorXd r_pert = perturbed.predict_rows(data.features) - data.labels;

  BoundCheck out;
  out.gap = std::abs(empirical_risk(perturbed, data) - empirical_risk(exact, data));
  out.lipschitz = 2.0 * std::max(r_exact.cwiseAbs().maxCoeff(), r_pert.cwiseAbs().maxCoeff());
  out.bound = out.lipschitz * data.features.rowwise().norm().maxCoeff() * gamma;
  out.holds = out.gap <= out.bound;
  return out;
}

std::string_view to_string(Table1Entry entry) {
  switch (entry) {
    case Table1Entry::svm_krr:
      return "svm_krr";
    case Table1Entry::krr_fast:
      return "krr_fast";
    case Table1Entry::divide_conquer:
      return "divide_conquer";
    case Table1Entry::nystrom:
      return "nystrom";
    case Table1Entry::falkon:
      return "falkon";
    case Table1Entry::qkls_qklr:
      return "qkls_qklr";
    case Table1Entry::qsvm:
      return "qsvm";
  }
  return "unknown";
}

Table1Entry parse_table1_entry(std::string_view name) {
  for (Table1Entry e : kEntries) {
    if (name == to_string(e)) return e;
  }
  throw InvalidArgument("unknown complexity table entry '" + std::string(name) + "'");
}

std::span<const Table1Entry> table1_entries() { return kEntries; }

std::string to_string(Rational r) {
  return r.den == 1 ? std::to_string(r.num) : fmt::format("{}/{}", r.num, r.den);
}

ComplexityRow table1_complexity(Table1Entry entry) {
  switch (entry) {
    case Table1Entry::svm_krr:
      return {entry, "SVM / KRR", {3, 1}, {1, 1}, false, false};
    case Table1Entry::krr_fast:
      return {entry, "KRR", {2, 1}, {1, 1}, false, false};
    case Table1Entry::divide_conquer:
      return {entry, "Divide and conquer", {2, 1}, {1, 1}, false, false};
    case Table1Entry::nystrom:
      return {entry, "Nystrom", {2, 1}, {1, 2}, false, false};
    case Table1Entry::falkon:
      return {entry, "FALKON", {3, 2}, {1, 2}, false, false};
    case Table1Entry::qkls_qklr:
      return {entry, "QKLS / QKLR", {1, 2}, {3, 2}, true, true};
    case Table1Entry::qsvm:
      return {entry, "QSVM", {3, 2}, {5, 2}, true, true};
  }
  throw InvalidArgument("unknown complexity table entry");
}

std::string_view to_string(CostAlgorithm algorithm) {
  switch (algorithm) {
    case CostAlgorithm::qkls_chakraborty:
      return "qkls";
    case CostAlgorithm::qls_schuld:
      return "schuld";
    case CostAlgorithm::matched_quantum:
      return "matched";
    case CostAlgorithm::table1:
      return "table1";
  }
  return "unknown";
}

CostAlgorithm parse_cost_algorithm(std::string_view name) {
  if (name == "qkls") return CostAlgorithm::qkls_chakraborty;
  if (name == "schuld") return CostAlgorithm::qls_schuld;
  if (name == "matched") return CostAlgorithm::matched_quantum;
  if (name == "table1") return CostAlgorithm::table1;
  throw InvalidArgument("unknown cost algorithm '" + std::string(name) + "'");
}

double cost_qkls(const CostModel& m) {
  check_cost_model(m);
  check_gamma_open_unit(m.gamma);
  if (!(m.frobenius > 0.0)) throw InvalidArgument("Frobenius norm must be > 0");
  return m.frobenius * m.kappa * lg(static_cast<double>(m.n)) * lg(m.kappa + 1.0) * lg(1.0 / m.gamma);
}

double cost_schuld(const CostModel& m) {
  check_cost_model(m);
  check_gamma_open_unit(m.gamma);
  return m.kappa * m.kappa * std::pow(m.gamma, -3.0) * lg(static_cast<double>(m.n));
}

double matched_cost(const CostModel& m) {
  check_cost_model(m);
  if (!(m.beta > 0.0) || !(m.c > 0.0)) throw InvalidArgument("beta and c must be > 0");
  const auto n = static_cast<double>(m.n);
  return std::pow(m.kappa, m.c) * std::pow(n, m.beta / 2.0) * lg(n);
}

std::size_t required_measurements(std::size_t n, PrecisionRegime regime) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  switch (regime) {
    case PrecisionRegime::heisenberg:
      return ceil_sqrt(n);
    case PrecisionRegime::shot_noise:
      return n;
    case PrecisionRegime::exact:
      break;
  }
  throw InvalidArgument("exact read-out needs no measurements");
}

double evaluate_cost(const CostModel& m) {
  switch (m.algorithm) {
    case CostAlgorithm::qkls_chakraborty:
      return cost_qkls(m);
    case CostAlgorithm::qls_schuld:
      return cost_schuld(m);
    case CostAlgorithm::matched_quantum:
      return matched_cost(m);
    case CostAlgorithm::table1:
      check_cost_model(m);
      return std::pow(static_cast<double>(m.n), table1_complexity(m.entry).train_exp.value());
  }
  throw InvalidArgument("unknown cost algorithm");
}

}  // namespace statlim::qmodel
