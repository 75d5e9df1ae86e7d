#include "statlim/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "statlim/errors.hpp"

namespace statlim {

Kernel Kernel::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("gaussian kernel bandwidth must be positive and finite");
  }
  return {Kind::gaussian, bandwidth};
}

double Kernel::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& z) const {
  switch (kind) {
    case Kind::linear:
      return x.dot(z);
    case Kind::gaussian:
      return std::exp(-(x - z).squaredNorm() / (2.0 * bandwidth * bandwidth));
  }
  return 0.0;
}

std::string_view to_string(Kernel::Kind kind) {
  return kind == Kernel::Kind::linear ? "linear" : "gaussian";
}

Kernel::Kind parse_kernel_kind(std::string_view name) {
  if (name == "linear") return Kernel::Kind::linear;
  if (name == "gaussian") return Kernel::Kind::gaussian;
  throw InvalidArgument("unknown kernel '" + std::string(name) + "'");
}

Eigen::MatrixXd kernel_matrix(const Kernel& kernel, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatch(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()));
  }
  Eigen::MatrixXd gram = a * b.transpose();
  if (kernel.kind == Kernel::Kind::gaussian) {
    // ||a_i - b_j||^2 = ||a_i||^2 + ||b_j||^2 - 2 <a_i, b_j>, clamped at 0 against cancellation.
    const Eigen::VectorXd an = a.rowwise().squaredNorm();
    const Eigen::VectorXd bn = b.rowwise().squaredNorm();
    const double scale = -1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        const double sq = std::max(0.0, an[i] + bn[j] - 2.0 * gram(i, j));
        gram(i, j) = std::exp(scale * sq);
      }
    }
  }
  return gram;
}

Predictor Predictor::primal(Eigen::VectorXd weights) {
  if (!weights.allFinite()) throw NumericalError("primal weights are not finite");
  return Predictor(PrimalForm{std::move(weights)});
}

Predictor Predictor::dual(Eigen::VectorXd coefficients, Eigen::MatrixXd landmarks, Kernel kernel) {
  if (coefficients.size() != landmarks.rows()) {
    throw DimensionMismatch(static_cast<std::size_t>(landmarks.rows()),
                            static_cast<std::size_t>(coefficients.size()));
  }
  if (!coefficients.allFinite() || !landmarks.allFinite()) {
    throw NumericalError("dual coefficients or landmarks are not finite");
  }
  return Predictor(DualForm{std::move(coefficients), std::move(landmarks), kernel});
}

Eigen::Index Predictor::dimension() const {
  return is_primal() ? primal_form().weights.size() : dual_form().landmarks.cols();
}

double Predictor::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) {
    throw DimensionMismatch(static_cast<std::size_t>(dimension()), static_cast<std::size_t>(x.size()));
  }
  if (is_primal()) return primal_form().weights.dot(x);
  const DualForm& f = dual_form();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < f.coefficients.size(); ++j) {
    sum += f.coefficients[j] * f.kernel(f.landmarks.row(j).transpose(), x);
  }
  return sum;
}

Eigen::VectorXd Predictor::predict_rows(const Eigen::MatrixXd& xs) const {
  if (xs.cols() != dimension()) {
    throw DimensionMismatch(static_cast<std::size_t>(dimension()), static_cast<std::size_t>(xs.cols()));
  }
  if (is_primal()) return xs * primal_form().weights;
  const DualForm& f = dual_form();
  // Row blocks bound the temporary Gram matrix to kBlock x m.
  constexpr Eigen::Index kBlock = 1024;
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index start = 0; start < xs.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, xs.rows() - start);
    out.segment(start, len) = kernel_matrix(f.kernel, xs.middleRows(start, len), f.landmarks) * f.coefficients;
  }
  return out;
}

}  // namespace statlim
