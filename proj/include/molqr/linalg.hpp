#pragma once

#include <Eigen/Dense>

namespace molqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Spectral (operator 2-) norm.
double op_norm(const Eigen::Ref<const Matrix>& M);

// ‖M‖ + 1, used throughout the perturbation constants.
inline double norm_plus(const Eigen::Ref<const Matrix>& M) { return op_norm(M) + 1.0; }

inline Matrix symmetrize(const Eigen::Ref<const Matrix>& M) {
  return 0.5 * (M + M.transpose());
}

// Extreme eigenvalues of a symmetric matrix.
double min_eigenvalue_sym(const Eigen::Ref<const Matrix>& M);
double max_eigenvalue_sym(const Eigen::Ref<const Matrix>& M);

// Smallest singular value.
double min_singular_value(const Eigen::Ref<const Matrix>& M);

bool is_symmetric(const Eigen::Ref<const Matrix>& M, double rel_tol = 1e-10);

}  // namespace molqr
