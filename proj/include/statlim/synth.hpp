#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace statlim {

enum class InputLaw {
  unit_sphere,       // x uniform on the unit sphere, ||x|| = 1
  clipped_gaussian,  // x ~ N(0, I_d), radially clipped at 3 sqrt(d)
};

std::string_view to_string(InputLaw law);
InputLaw parse_input_law(std::string_view name);

/// Linear-Gaussian regression problem: y = <w_star, x> + sigma * eps.
///
/// The target is inside the linear hypothesis class, so the Bayes predictor is
/// x -> <w_star, x> and the Bayes risk under squared loss is sigma^2.
struct SyntheticProblem {
  Eigen::VectorXd w_star;
  double sigma = 0.0;
  InputLaw input_law = InputLaw::unit_sphere;

  Eigen::Index dimension() const { return w_star.size(); }
  double bayes_risk() const { return sigma * sigma; }
  /// Deterministic bound on ||x|| for every sampled input.
  double max_input_norm() const;
};

struct Dataset {
  Eigen::MatrixXd features;  // n x d, one sample per row
  Eigen::VectorXd labels;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dimension() const { return features.cols(); }
};

/// w_star is drawn uniformly on the unit sphere from `seed`.
SyntheticProblem make_problem(Eigen::Index d, double sigma, InputLaw law, std::uint64_t seed);

/// Draws n i.i.d. samples. Row i consumes its input draw and then one noise
/// draw, so the stream layout is fixed and independent of sigma.
Dataset sample_dataset(const SyntheticProblem& problem, Eigen::Index n, std::uint64_t seed);

double bayes_risk(const SyntheticProblem& problem);

/// The rows and labels named by `rows`, in that order.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& rows);

}  // namespace statlim
