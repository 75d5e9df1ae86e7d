#include "statlim/linalg.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "statlim/errors.hpp"

namespace statlim::linalg {

SpdSolution solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, bool allow_fallback) {
  if (a.rows() != a.cols()) throw InvalidArgument("system matrix must be square");
  if (a.rows() != b.size()) throw DimensionMismatch(static_cast<std::size_t>(a.rows()),
                                                    static_cast<std::size_t>(b.size()));
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success && llt.rcond() >= kEigenFloor) {
    return {llt.solve(b), SolveMethod::cholesky};
  }
  if (!allow_fallback) {
    throw NumericalError("system matrix is singular or not positive definite");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = values.maxCoeff();
  if (!(top > 0.0)) throw NumericalError("system matrix has no positive eigenvalue");
  const double floor = kEigenFloor * top;
  Eigen::VectorXd coords = eig.eigenvectors().transpose() * b;
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    coords[i] = values[i] > floor ? coords[i] / values[i] : 0.0;
  }
  return {eig.eigenvectors() * coords, SolveMethod::eigen_fallback};
}

double top_eigenvalue(const Eigen::MatrixXd& a, double rel_tol, int max_iters) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 0.0;
  // Deterministic start with a component along every coordinate.
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0).normalized();
  double estimate = v.dot(a * v);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(a * v);
    if (std::abs(next - estimate) <= rel_tol * std::abs(next)) return next;
    estimate = next;
  }
  return estimate;
}

bool is_psd(const Eigen::MatrixXd& k, double rel_tol) {
  const double scale = k.norm();
  if (scale == 0.0) return true;
  Eigen::MatrixXd shifted = k;
  shifted.diagonal().array() += rel_tol * scale;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  return llt.info() == Eigen::Success;
}

}  // namespace statlim::linalg
