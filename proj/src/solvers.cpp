#include "statlim/solvers.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "statlim/errors.hpp"
#include "statlim/linalg.hpp"
#include "statlim/random.hpp"
#include "statlim/risk.hpp"

namespace statlim {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr int kDivergencePatience = 5;

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
}

void check_nonempty(const Dataset& data) {
  if (data.size() < 1 || data.dimension() < 1) throw InvalidArgument("dataset is empty");
}

// One step of iterative refinement if the first solve misses the tolerance.
Eigen::VectorXd solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, bool allow_fallback) {
  Eigen::VectorXd x = linalg::solve_spd(a, b, allow_fallback).x;
  const double limit = kResidualTolerance * b.norm();
  Eigen::VectorXd residual = a * x - b;
  if (residual.norm() > limit) {
    x -= linalg::solve_spd(a, residual, allow_fallback).x;
    residual = a * x - b;
  }
  if (residual.norm() > limit) {
    throw NumericalError(fmt::format("linear solve residual {:.3e} exceeds {:.3e}", residual.norm(), limit));
  }
  return x;
}

std::vector<std::size_t> iota_indices(Eigen::Index n) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

double default_lambda(Eigen::Index n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

std::size_t ceil_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while (r * r < n) ++r;
  return r;
}

Predictor exact_ls(const Dataset& data, double lambda) {
  check_nonempty(data);
  check_lambda(lambda);
  const auto n = static_cast<double>(data.size());
  Eigen::MatrixXd system = data.features.transpose() * data.features;
  system.diagonal().array() += lambda * n;
  const Eigen::VectorXd rhs = data.features.transpose() * data.labels;
  // Regularised systems are SPD; the fallback only absorbs roundoff there.
  return Predictor::primal(solve_checked(system, rhs, lambda > 0.0));
}

Predictor krr(const Dataset& data, const Kernel& kernel, double lambda) {
  check_nonempty(data);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("krr requires lambda > 0");
  Eigen::MatrixXd k = kernel_matrix(kernel, data.features, data.features);
  if (!linalg::is_psd(k)) throw NumericalError("kernel matrix is not positive semidefinite");
  k.diagonal().array() += lambda * static_cast<double>(data.size());
  return Predictor::dual(solve_checked(k, data.labels, true), data.features, kernel);
}

GradientDescentTrace early_stopping_gd_trace(const Dataset& data, const Kernel& kernel, const SolverConfig& config) {
  check_nonempty(data);
  const Eigen::Index n = data.size();
  const auto nd = static_cast<double>(n);
  const std::size_t iters = config.max_iters.value_or(ceil_sqrt(static_cast<std::size_t>(n)));
  const bool primal = kernel.kind == Kernel::Kind::linear;

  // Primal: risk(w) = ||Xw - y||^2 / n, gradient (2/n) X^T (Xw - y), smoothness 2 lambda_max(X^T X / n).
  // Dual:   f = K alpha, alpha <- alpha - eta (2/n) (K alpha - y), smoothness 2 lambda_max(K / n).
  Eigen::MatrixXd op = primal ? Eigen::MatrixXd(data.features.transpose() * data.features / nd)
                              : Eigen::MatrixXd(kernel_matrix(kernel, data.features, data.features));
  const double smoothness = primal ? 2.0 * linalg::top_eigenvalue(op) : 2.0 * linalg::top_eigenvalue(op) / nd;
  const double step = config.step_size.value_or(smoothness > 0.0 ? 1.0 / smoothness : 1.0);
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("step size must be positive");

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(primal ? data.dimension() : n);
  Eigen::VectorXd fitted = Eigen::VectorXd::Zero(n);
  std::vector<double> risks;
  risks.reserve(iters + 1);
  auto risk_of = [&](const Eigen::VectorXd& f) {
    const Eigen::VectorXd sq = (f - data.labels).array().square().matrix();
    return order_invariant_mean({sq.data(), static_cast<std::size_t>(sq.size())});
  };
  risks.push_back(risk_of(fitted));

  // Increases below this are roundoff once the iterates have converged.
  const double noise_floor = 1e-12 * risks.front();
  int increases = 0;
  for (std::size_t t = 0; t < iters; ++t) {
    const Eigen::VectorXd residual = fitted - data.labels;
    if (primal) {
      coef -= step * (2.0 / nd) * (data.features.transpose() * residual);
      fitted = data.features * coef;
    } else {
      coef -= step * (2.0 / nd) * residual;
      fitted = op * coef;
    }
    const double r = risk_of(fitted);
    increases = r > risks.back() + noise_floor ? increases + 1 : 0;
    risks.push_back(r);
    if (increases >= kDivergencePatience || !std::isfinite(r)) {
      throw NumericalError(fmt::format("gradient descent diverged with step size {:.6g} (1/L = {:.6g})", step,
                                       smoothness > 0.0 ? 1.0 / smoothness : 0.0));
    }
  }
  Predictor predictor = primal ? Predictor::primal(coef) : Predictor::dual(coef, data.features, kernel);
  return {std::move(predictor), std::move(risks), step, smoothness};
}

Predictor early_stopping_gd(const Dataset& data, const Kernel& kernel, const SolverConfig& config) {
  return early_stopping_gd_trace(data, kernel, config).predictor;
}

Predictor divide_and_conquer(const Dataset& data, const Kernel& kernel, const SolverConfig& config) {
  check_nonempty(data);
  const auto n = static_cast<std::size_t>(data.size());
  const std::size_t p = config.partitions;
  if (p < 1) throw InvalidArgument("partitions must be >= 1");
  if (p > n) throw InvalidArgument(fmt::format("partitions ({}) exceed sample size ({})", p, n));
  const double lambda = config.lambda_for(data.size());

  std::vector<std::size_t> order = iota_indices(data.size());
  if (config.shuffle) {
    Rng rng(config.seed);
    rng.shuffle_prefix(order, n);
  }

  Eigen::VectorXd coefficients(data.size());
  Eigen::MatrixXd landmarks(data.size(), data.dimension());
  std::size_t offset = 0;
  for (std::size_t b = 0; b < p; ++b) {
    // The first n % p blocks take one extra sample.
    const std::size_t len = n / p + (b < n % p ? 1 : 0);
    const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                        order.begin() + static_cast<std::ptrdiff_t>(offset + len));
    const Dataset block = subset(data, rows);
    const Predictor local = krr(block, kernel, lambda);
    const auto off = static_cast<Eigen::Index>(offset);
    const auto l = static_cast<Eigen::Index>(len);
    coefficients.segment(off, l) = local.dual_form().coefficients / static_cast<double>(p);
    landmarks.middleRows(off, l) = block.features;
    offset += len;
  }
  return Predictor::dual(std::move(coefficients), std::move(landmarks), kernel);
}

Predictor nystrom(const Dataset& data, const Kernel& kernel, const SolverConfig& config) {
  check_nonempty(data);
  const auto n = static_cast<std::size_t>(data.size());
  const std::size_t m = config.landmarks.value_or(ceil_sqrt(n));
  if (m < 1) throw InvalidArgument("landmarks must be >= 1");
  if (m > n) throw InvalidArgument(fmt::format("landmarks ({}) exceed sample size ({})", m, n));
  const double lambda = config.lambda_for(data.size());
  check_lambda(lambda);

  std::vector<std::size_t> order = iota_indices(data.size());
  Rng rng(config.seed);
  rng.shuffle_prefix(order, m);
  order.resize(m);
  const Eigen::MatrixXd centers = subset(data, order).features;

  const Eigen::MatrixXd knm = kernel_matrix(kernel, data.features, centers);
  Eigen::MatrixXd system = knm.transpose() * knm;
  system += lambda * static_cast<double>(n) * kernel_matrix(kernel, centers, centers);
  const Eigen::VectorXd rhs = knm.transpose() * data.labels;
  return Predictor::dual(solve_checked(system, rhs, lambda > 0.0), centers, kernel);
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::exact_ls:
      return "exact_ls";
    case SolverKind::krr:
      return "krr";
    case SolverKind::early_stopping:
      return "early_stopping";
    case SolverKind::divide_and_conquer:
      return "divide_and_conquer";
    case SolverKind::nystrom:
      return "nystrom";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  for (SolverKind k : {SolverKind::exact_ls, SolverKind::krr, SolverKind::early_stopping,
                       SolverKind::divide_and_conquer, SolverKind::nystrom}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidArgument("unknown solver '" + std::string(name) + "'");
}

Predictor fit(SolverKind kind, const Dataset& data, const Kernel& kernel, const SolverConfig& config) {
  switch (kind) {
    case SolverKind::exact_ls:
      return exact_ls(data, config.lambda_for(data.size()));
    case SolverKind::krr:
      return krr(data, kernel, config.lambda_for(data.size()));
    case SolverKind::early_stopping:
      return early_stopping_gd(data, kernel, config);
    case SolverKind::divide_and_conquer:
      return divide_and_conquer(data, kernel, config);
    case SolverKind::nystrom:
      return nystrom(data, kernel, config);
  }
  throw InvalidArgument("unknown solver");
}

}  // namespace statlim
