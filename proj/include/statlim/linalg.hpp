#pragma once

#include <Eigen/Core>

namespace statlim::linalg {

enum class SolveMethod { cholesky, eigen_fallback };

struct SpdSolution {
  Eigen::VectorXd x;
  SolveMethod method = SolveMethod::cholesky;
};

// Eigenvalues below this fraction of the largest are treated as zero by the
// fallback path.
inline constexpr double kEigenFloor = 1e-12;

/// Solves A x = b for symmetric positive (semi)definite A.
///
/// Cholesky first; the factorisation is rejected if it fails or its reciprocal
/// condition estimate is below kEigenFloor. On rejection, throws NumericalError
/// when `allow_fallback` is false; otherwise solves through a symmetric
/// eigendecomposition, discarding eigenvalues below kEigenFloor * lambda_max.
SpdSolution solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, bool allow_fallback);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopping
/// when the Rayleigh quotient changes by less than rel_tol (relative).
double top_eigenvalue(const Eigen::MatrixXd& a, double rel_tol = 1e-6, int max_iters = 500);

/// True when min eig(K) >= -rel_tol * ||K||_2. Checked with one Cholesky of
/// K + rel_tol * ||K||_F * I, so the test costs one factorisation.
bool is_psd(const Eigen::MatrixXd& k, double rel_tol = 1e-8);

}  // namespace statlim::linalg
