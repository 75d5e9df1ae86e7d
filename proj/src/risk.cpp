#include "statlim/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "statlim/errors.hpp"

namespace statlim {

namespace {

void check_dimension(const Predictor& predictor, Eigen::Index d) {
  if (predictor.dimension() != d) {
    throw DimensionMismatch(static_cast<std::size_t>(predictor.dimension()), static_cast<std::size_t>(d));
  }
}

RiskEstimate summarize(const Eigen::VectorXd& samples) {
  const std::span<const double> view(samples.data(), static_cast<std::size_t>(samples.size()));
  const double mean = order_invariant_mean(view);
  std::vector<double> sq(view.size());
  std::transform(view.begin(), view.end(), sq.begin(), [mean](double v) { return (v - mean) * (v - mean); });
  std::sort(sq.begin(), sq.end());
  const double n = static_cast<double>(view.size());
  const double variance = view.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(variance / n), view.size()};
}

void check_eval_size(std::size_t n_eval) {
  if (n_eval < 2) throw InvalidArgument("n_eval must be >= 2");
}

}  // namespace

double loss(Loss kind, double y, double yhat) {
  switch (kind) {
    case Loss::squared:
      return (yhat - y) * (yhat - y);
  }
  return 0.0;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double order_invariant_mean(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("mean of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return pairwise_sum(sorted) / static_cast<double>(sorted.size());
}

Eigen::VectorXd pointwise_losses(const Predictor& predictor, const Dataset& data, Loss kind) {
  check_dimension(predictor, data.dimension());
  const Eigen::VectorXd predictions = predictor.predict_rows(data.features);
  Eigen::VectorXd losses(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) losses[i] = loss(kind, data.labels[i], predictions[i]);
  return losses;
}

double empirical_risk(const Predictor& predictor, const Dataset& data, Loss kind) {
  const Eigen::VectorXd losses = pointwise_losses(predictor, data, kind);
  return order_invariant_mean({losses.data(), static_cast<std::size_t>(losses.size())});
}

RiskEstimate expected_risk_mc(const Predictor& predictor, const SyntheticProblem& problem,
                              std::size_t n_eval, std::uint64_t seed) {
  check_eval_size(n_eval);
  check_dimension(predictor, problem.dimension());
  const Dataset eval = sample_dataset(problem, static_cast<Eigen::Index>(n_eval), seed);
  return summarize(pointwise_losses(predictor, eval));
}

double excess_risk(const Predictor& predictor, const SyntheticProblem& problem, std::size_t n_eval,
                   std::uint64_t seed) {
  return expected_risk_mc(predictor, problem, n_eval, seed).value - problem.bayes_risk();
}

RiskEstimate excess_risk_paired(const Predictor& predictor, const SyntheticProblem& problem,
                                std::size_t n_eval, std::uint64_t seed) {
  check_eval_size(n_eval);
  check_dimension(predictor, problem.dimension());
  const Dataset eval = sample_dataset(problem, static_cast<Eigen::Index>(n_eval), seed);
  const Eigen::VectorXd predictions = predictor.predict_rows(eval.features);
  const Eigen::VectorXd bayes = eval.features * problem.w_star;
  Eigen::VectorXd diff(eval.size());
  for (Eigen::Index i = 0; i < eval.size(); ++i) {
    diff[i] = loss(Loss::squared, eval.labels[i], predictions[i]) - loss(Loss::squared, eval.labels[i], bayes[i]);
  }
  return summarize(diff);
}

double generalization_gap(const Predictor& predictor, const Dataset& train, const SyntheticProblem& problem,
                          std::size_t n_eval, std::uint64_t seed) {
  return std::abs(empirical_risk(predictor, train) - expected_risk_mc(predictor, problem, n_eval, seed).value);
}

}  // namespace statlim
