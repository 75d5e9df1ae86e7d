#include "statlim/synth.hpp"

#include <cmath>
#include <vector>

#include "statlim/errors.hpp"
#include "statlim/random.hpp"

namespace statlim {

namespace {

double clip_radius(Eigen::Index d) { return 3.0 * std::sqrt(static_cast<double>(d)); }

// Rescales x onto the closed ball of radius r. The target radius sits
// (d + 2) ulps inside r, so the norm stays <= r under any summation order.
void project_to_ball(Eigen::Ref<Eigen::VectorXd> x, double r) {
  const double inner = r * (1.0 - static_cast<double>(x.size() + 2) * 0x1.0p-53);
  const double norm = x.norm();
  if (norm <= inner) return;
  x *= inner / norm;
  while (x.norm() > inner) x *= 1.0 - 0x1.0p-52;
}

void draw_input(Rng& rng, InputLaw law, Eigen::Ref<Eigen::VectorXd> x) {
  const Eigen::Index d = x.size();
  switch (law) {
    case InputLaw::unit_sphere:
      x = rng.unit_vector(d);
      project_to_ball(x, 1.0);  // norm 1 to within d ulps
      return;
    case InputLaw::clipped_gaussian:
      for (Eigen::Index j = 0; j < d; ++j) x[j] = rng.normal();
      project_to_ball(x, clip_radius(d));
      return;
  }
}

}  // namespace

std::string_view to_string(InputLaw law) {
  switch (law) {
    case InputLaw::unit_sphere:
      return "unit_sphere";
    case InputLaw::clipped_gaussian:
      return "clipped_gaussian";
  }
  return "unknown";
}

InputLaw parse_input_law(std::string_view name) {
  if (name == "unit_sphere") return InputLaw::unit_sphere;
  if (name == "clipped_gaussian") return InputLaw::clipped_gaussian;
  throw InvalidArgument("unknown input law '" + std::string(name) + "'");
}

double SyntheticProblem::max_input_norm() const {
  return input_law == InputLaw::unit_sphere ? 1.0 : clip_radius(dimension());
}

SyntheticProblem make_problem(Eigen::Index d, double sigma, InputLaw law, std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("problem dimension must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("noise standard deviation must be finite and >= 0");
  }
  Rng rng(seed);
  return SyntheticProblem{rng.unit_vector(d), sigma, law};
}

Dataset sample_dataset(const SyntheticProblem& problem, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  const Eigen::Index d = problem.dimension();
  Dataset data{Eigen::MatrixXd(n, d), Eigen::VectorXd(n), seed};
  Rng rng(seed);
  Eigen::VectorXd x(d);
  Eigen::VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    draw_input(rng, problem.input_law, x);
    eps[i] = rng.normal();
    data.features.row(i) = x.transpose();
  }
  // Same product as a primal predictor's predict_rows, so w_star reproduces
  // noiseless labels bit for bit.
  data.labels = data.features * problem.w_star + problem.sigma * eps;
  return data;
}

double bayes_risk(const SyntheticProblem& problem) { return problem.bayes_risk(); }

Dataset subset(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset out{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), data.dimension()),
              Eigen::VectorXd(static_cast<Eigen::Index>(rows.size())), data.seed};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(data.size())) {
      throw InvalidArgument("subset row " + std::to_string(rows[i]) + " out of range");
    }
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(r);
    out.labels[static_cast<Eigen::Index>(i)] = data.labels[r];
  }
  return out;
}

}  // namespace statlim
