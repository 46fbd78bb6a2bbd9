#pragma once

#include "molqr/linalg.hpp"

namespace molqr {

/// Solution of the discrete algebraic Riccati equation
///   P = AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q.
struct DareSolution {
  Matrix P;
  double residual_norm = 0.0;
  int iterations = 0;
};

enum class DareMethod {
  kFixedPoint,  // plain Riccati-map iteration from P₀ = Q
  kDoubling,    // structured doubling, then Riccati-map polishing
};

struct DareOptions {
  double tol = 1e-12;
  int max_iter = 10'000;
  DareMethod method = DareMethod::kDoubling;
};

/// Stabilizing solution of the DARE. Convergence is declared when
/// ‖F(P)‖ ≤ tol·max(1, ‖P‖), F being the Riccati residual below.
///
/// Throws kBadInput for non-symmetric or non-positive-definite Q/R,
/// kDimensionMismatch for inconsistent shapes and kNonConvergence when
/// max_iter is exhausted (typically a nearly unstabilizable pair).
DareSolution solve_dare(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                        const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                        const DareOptions& options = {});

/// Spectral norm of X − AᵀXA + AᵀXB(R + BᵀXB)⁻¹BᵀXA − Q.
/// Throws kSingularInnerMatrix when R + BᵀXB cannot be inverted.
double dare_residual(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& A,
                     const Eigen::Ref<const Matrix>& B, const Eigen::Ref<const Matrix>& Q,
                     const Eigen::Ref<const Matrix>& R);

enum class LyapunovForm {
  kForward,     // P = A P Aᵀ + Q  (dlyape(A, Q))
  kTransposed,  // P = Aᵀ P A + Q  (dlyape(Aᵀ, Q))
};

/// Unique solution of the discrete Lyapunov equation. Requires ρ(A) < 1,
/// otherwise throws kUnstable. Solved directly on the Kronecker system, so
/// intended for n up to a few dozen.
Matrix solve_dlyap(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& Q,
                   LyapunovForm form = LyapunovForm::kForward);

double spectral_radius(const Eigen::Ref<const Matrix>& M);

/// ρ(A + BK) < 1 − margin_tol.
bool is_stabilizing(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                    const Eigen::Ref<const Matrix>& K, double margin_tol = 0.0);

/// PBH test: rank [A − λI, B] = n for every eigenvalue |λ| ≥ 1.
bool is_stabilizable(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                     double rank_tol = 1e-9);

/// τ(L, ρ) = sup_k ‖Lᵏ‖ρ⁻ᵏ restricted to k ≤ k_truncation.
struct GrowthRate {
  double tau = 1.0;
  double rho = 1.0;
  int k_truncation = 0;
  // True when some K ≥ 1 with ‖Lᴷ‖ρ⁻ᴷ ≤ 1 was found; submultiplicativity then
  // bounds every later term by the maximum over k ≤ K, so tau is the exact sup.
  bool tail_certified = false;
};

/// Throws kDiverging when ρ is below the spectral radius of L (τ = ∞) and
/// kBadInput when rho ≤ 0.
GrowthRate growth_rate_tau(const Eigen::Ref<const Matrix>& L, double rho, int k_max = 500);

/// B·L⁻ᵀ for the Cholesky factor R = LLᵀ; the DARE with (A, BL⁻ᵀ, Q, I) has
/// the same solution as with (A, B, Q, R). Throws kNotPositiveDefinite.
Matrix reduce_to_identity_cost(const Eigen::Ref<const Matrix>& A,
                               const Eigen::Ref<const Matrix>& B,
                               const Eigen::Ref<const Matrix>& R);

}  // namespace molqr
