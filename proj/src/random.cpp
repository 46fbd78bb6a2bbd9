#include "molqr/random.hpp"

namespace molqr {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  }
  return M;
}

Matrix unit_direction(Eigen::Index rows, Eigen::Index cols, bool symmetric, std::mt19937_64& rng) {
  Matrix M;
  do {
    M = gaussian_matrix(rows, cols, rng);
    if (symmetric) M = symmetrize(M);
  } while (op_norm(M) == 0.0);
  return M / op_norm(M);
}

}  // namespace molqr
