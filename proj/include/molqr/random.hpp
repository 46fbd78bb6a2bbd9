#pragma once

#include <random>

#include "molqr/linalg.hpp"

namespace molqr {

/// Standard Gaussian matrix.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

/// Gaussian direction with spectral norm exactly 1, symmetrized on request.
Matrix unit_direction(Eigen::Index rows, Eigen::Index cols, bool symmetric, std::mt19937_64& rng);

}  // namespace molqr
