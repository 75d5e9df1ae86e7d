#pragma once

#include <cstdint>
#include <span>

#include "statlim/predictor.hpp"
#include "statlim/synth.hpp"

namespace statlim {

enum class Loss { squared };

/// l(y, yhat) = (yhat - y)^2
double loss(Loss kind, double y, double yhat);

/// Pairwise (tree) summation: blocks of 8 summed left to right, halves combined
/// recursively. Summation order depends only on the length.
double pairwise_sum(std::span<const double> values);

/// Mean of the values after sorting ascending, summed pairwise. The result is
/// a function of the multiset of values, hence bit-identical under permutation.
double order_invariant_mean(std::span<const double> values);

/// Monte Carlo estimate of an expectation.
struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n_eval)
  std::size_t n_eval = 0;
};

/// Per-sample losses of the predictor on the dataset.
Eigen::VectorXd pointwise_losses(const Predictor& predictor, const Dataset& data, Loss kind = Loss::squared);

double empirical_risk(const Predictor& predictor, const Dataset& data, Loss kind = Loss::squared);

/// Empirical risk on a fresh sample of n_eval points drawn from `problem` with `seed`.
RiskEstimate expected_risk_mc(const Predictor& predictor, const SyntheticProblem& problem,
                              std::size_t n_eval, std::uint64_t seed);

/// expected_risk_mc(...).value - bayes_risk(problem).
double excess_risk(const Predictor& predictor, const SyntheticProblem& problem, std::size_t n_eval,
                   std::uint64_t seed);

/// Excess risk estimated with the Bayes predictor as a control variate: the
/// mean over one evaluation sample of l(y, f(x)) - l(y, <w_star, x>). Same
/// expectation as excess_risk, with the label-noise variance cancelled, and
/// exactly zero for f = w_star.
RiskEstimate excess_risk_paired(const Predictor& predictor, const SyntheticProblem& problem,
                                std::size_t n_eval, std::uint64_t seed);

/// |empirical_risk(predictor, train) - expected_risk_mc(predictor, problem).value|
double generalization_gap(const Predictor& predictor, const Dataset& train, const SyntheticProblem& problem,
                          std::size_t n_eval, std::uint64_t seed);

}  // namespace statlim
