#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "molqr/pareto.hpp"

namespace molqr {

enum class Provenance { kSynthetic, kIdentified };

std::string_view to_string(Provenance p);

struct EstimatedDynamics {
  Matrix A_hat;
  Matrix B_hat;
  double err_A = 0.0;  // ‖A − Â‖
  double err_B = 0.0;  // ‖B − B̂‖
  Provenance provenance = Provenance::kSynthetic;
  double epsilon_dyn = 0.0;  // requested perturbation size (synthetic mode)
};

/// Â = A + E_A, B̂ = B + E_B with Gaussian directions scaled to spectral norm
/// exactly epsilon. Draws are repeated until (Â, B̂) is stabilizable; throws
/// kCannotStabilize after `max_attempts` failed draws.
EstimatedDynamics perturb_dynamics(const DynamicsModel& dynamics, double epsilon,
                                   std::uint64_t seed, int max_attempts = 100);

struct IdentificationOptions {
  double excitation_std = 1.0;
  int horizon = 50;
  int rollouts = 10;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  // Optional exploration feedback u_t = K x_t + excitation.
  std::optional<Matrix> feedback;
};

/// Least squares fit of x_{t+1} ≈ Â x_t + B̂ u_t on simulated rollouts with
/// x₀ ~ N(0, I), Gaussian excitation and additive process noise. Throws
/// kRankDeficient when the stacked regressors [x; u] lack full row rank and
/// kCannotStabilize when the fitted pair is not stabilizable.
EstimatedDynamics identify_dynamics(const DynamicsModel& dynamics,
                                    const IdentificationOptions& options);

/// Front designed on the estimates, audited on the true dynamics.
struct CEFront {
  ParetoFrontApprox base;
  std::vector<bool> true_stable_flags;
  std::vector<Vector> true_losses;  // +∞ entries where the gain destabilizes
  EstimatedDynamics estimates;
};

CEFront ce_front(const MultiObjectiveProblem& problem, const EstimatedDynamics& estimates,
                 double epsilon, const FrontOptions& options = {});

struct CEWeightError {
  Vector w;
  bool stable_true = false;
  double weighted_err = 0.0;  // |𝓛_w(K_w) − 𝓛_w(K̂_w)| on the true dynamics
  double uniform_err = 0.0;   // ‖𝓛⃗(K_w) − 𝓛⃗(K̂_w)‖∞
};

struct CEReport {
  double epsilon_dyn = 0.0;
  Provenance provenance = Provenance::kSynthetic;
  std::vector<CEWeightError> per_weight;
  double sup_weighted = 0.0;  // over true-stable weights
  double sup_uniform = 0.0;
  double stable_fraction = 0.0;
};

/// Throws kNetMismatch unless both fronts share the same net.
CEReport ce_error_report(const MultiObjectiveProblem& problem, const ParetoFrontApprox& true_front,
                         const CEFront& ce);

}  // namespace molqr
