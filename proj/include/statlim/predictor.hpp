#pragma once

#include <string_view>
#include <variant>

#include <Eigen/Core>

namespace statlim {

struct Kernel {
  enum class Kind { linear, gaussian };

  Kind kind = Kind::linear;
  double bandwidth = 1.0;  // gaussian only: k(x, z) = exp(-||x - z||^2 / (2 bandwidth^2))

  static Kernel linear() { return {Kind::linear, 1.0}; }
  static Kernel gaussian(double bandwidth);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& z) const;

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

std::string_view to_string(Kernel::Kind kind);
Kernel::Kind parse_kernel_kind(std::string_view name);

/// Gram matrix G(i, j) = k(a_i, b_j) for row-sample matrices a and b.
Eigen::MatrixXd kernel_matrix(const Kernel& kernel, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct PrimalForm {
  Eigen::VectorXd weights;
};

struct DualForm {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd landmarks;  // m x d
  Kernel kernel;
};

/// A learned hypothesis: either x -> <w, x> or x -> sum_j alpha_j k(z_j, x).
class Predictor {
 public:
  static Predictor primal(Eigen::VectorXd weights);
  static Predictor dual(Eigen::VectorXd coefficients, Eigen::MatrixXd landmarks, Kernel kernel);

  bool is_primal() const { return std::holds_alternative<PrimalForm>(form_); }
  const PrimalForm& primal_form() const { return std::get<PrimalForm>(form_); }
  const DualForm& dual_form() const { return std::get<DualForm>(form_); }

  Eigen::Index dimension() const;

  /// Throws DimensionMismatch when x.size() != dimension().
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Predictions for every row of xs.
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& xs) const;

 private:
  explicit Predictor(std::variant<PrimalForm, DualForm> form) : form_(std::move(form)) {}
  std::variant<PrimalForm, DualForm> form_;
};

inline double predict(const Predictor& predictor, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predictor.predict(x);
}

}  // namespace statlim
