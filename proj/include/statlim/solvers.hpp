#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "statlim/predictor.hpp"
#include "statlim/synth.hpp"

namespace statlim {

/// Default Tikhonov schedule lambda_n = n^{-1/2}.
double default_lambda(Eigen::Index n);

/// ceil(sqrt(n)), exact for all n representable as size_t.
std::size_t ceil_sqrt(std::size_t n);

struct SolverConfig {
  std::optional<double> lambda;          // unset: default_lambda(n)
  std::optional<double> step_size;       // unset: 1 / L, L from power iteration
  std::optional<std::size_t> max_iters;  // unset: ceil(sqrt(n))
  std::size_t partitions = 1;
  std::optional<std::size_t> landmarks;  // unset: ceil(sqrt(n))
  std::uint64_t seed = 0;
  bool shuffle = true;  // divide_and_conquer: shuffle before splitting into blocks

  double lambda_for(Eigen::Index n) const { return lambda.value_or(default_lambda(n)); }
};

/// Tikhonov least squares in the primal: solves (X^T X + lambda n I) w = X^T y.
///
/// lambda = 0 requires a full-rank design; a rank-deficient system throws
/// NumericalError rather than returning a pseudo-solution. Every solve is
/// checked against ||(X^T X + lambda n I) w - X^T y|| <= 1e-10 ||X^T y||.
Predictor exact_ls(const Dataset& data, double lambda);

/// Kernel ridge regression: alpha = (K + lambda n I)^{-1} y on all training points.
/// Throws NumericalError if K fails the PSD check (min eig >= -1e-8 ||K||).
Predictor krr(const Dataset& data, const Kernel& kernel, double lambda);

struct GradientDescentTrace {
  Predictor predictor;
  std::vector<double> risks;  // empirical risk of iterates 0..t
  double step_size = 0.0;
  double smoothness = 0.0;    // L = 2 lambda_max(K / n), Lipschitz constant of the gradient
};

/// Full-batch gradient descent on the unregularised empirical risk from zero,
/// stopped after config.max_iters steps. Linear kernels iterate on primal
/// weights; other kernels iterate on dual coefficients (functional gradient).
/// Throws NumericalError if the risk increases on 5 consecutive iterations.
GradientDescentTrace early_stopping_gd_trace(const Dataset& data, const Kernel& kernel, const SolverConfig& config);
Predictor early_stopping_gd(const Dataset& data, const Kernel& kernel, const SolverConfig& config);

/// Splits the (optionally shuffled) data into p near-equal blocks, fits krr on
/// each with the same lambda and averages the block predictors uniformly.
Predictor divide_and_conquer(const Dataset& data, const Kernel& kernel, const SolverConfig& config);

/// Nystrom KRR on m landmarks drawn uniformly without replacement:
/// (K_nm^T K_nm + lambda n K_mm) alpha = K_nm^T y.
Predictor nystrom(const Dataset& data, const Kernel& kernel, const SolverConfig& config);

enum class SolverKind { exact_ls, krr, early_stopping, divide_and_conquer, nystrom };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

/// Dispatch helper shared by the harness and the CLI.
Predictor fit(SolverKind kind, const Dataset& data, const Kernel& kernel, const SolverConfig& config);

}  // namespace statlim
