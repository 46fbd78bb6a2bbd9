#pragma once

#include <optional>
#include <string>
#include <vector>

#include "molqr/error.hpp"
#include "molqr/scalarization.hpp"

namespace molqr {

struct FrontFailure {
  std::size_t index = 0;
  ErrorCode code = ErrorCode::kNonConvergence;
  std::string message;
};

/// The image of a weight net under the scalarized optimal controller. Entry
/// i of `points` belongs to `net.points[i]`; it is empty when that solve
/// failed, in which case `failures` carries the reason.
struct ParetoFrontApprox {
  double epsilon = 1.0;
  WeightNet net;
  std::vector<std::optional<ParetoPoint>> points;
  std::vector<FrontFailure> failures;
  std::string problem_digest;

  bool complete() const { return failures.empty(); }
};

struct FrontOptions {
  int workers = 1;
  DareOptions dare;
  double point_budget = kDefaultNetPointBudget;
};

/// Stable hex digest of the problem data (dimensions and every matrix entry).
std::string problem_digest(const MultiObjectiveProblem& problem);

/// Solves every net weight; per-weight failures are recorded, not thrown.
ParetoFrontApprox approximate_front(const MultiObjectiveProblem& problem, double epsilon,
                                    const FrontOptions& options = {});

/// Same sweep over a caller-provided net.
ParetoFrontApprox front_over_net(const MultiObjectiveProblem& problem, const WeightNet& net,
                                 const FrontOptions& options = {});

inline constexpr double kLossAbsTol = 1e-9;
inline constexpr double kLossRelTol = 1e-9;

/// l1 ≤ l2 + tol everywhere and l1 < l2 − tol somewhere.
bool dominates(const Vector& l1, const Vector& l2, double tol = 0.0);

/// Indices (ascending) of the vectors not dominated by any other vector.
std::vector<std::size_t> dominance_filter(const std::vector<Vector>& losses, double tol = 0.0);

struct EvaluatedGain {
  GainMatrix K;
  Vector losses;
};

/// Evaluates every stabilizing gain of the grid and keeps the nondominated
/// ones. Throws kEmptyGrid when no candidate stabilizes.
std::vector<EvaluatedGain> brute_force_front(const MultiObjectiveProblem& problem,
                                             const std::vector<GainMatrix>& control_grid,
                                             double tol = 0.0);

/// Largest ℓ∞ distance from a brute-force loss vector to its closest front
/// loss vector, with objective i measured in units of the brute-force range
/// of loss i (or max(1, |loss|) when that range is zero).
double normalized_coverage_gap(const std::vector<EvaluatedGain>& brute,
                               const ParetoFrontApprox& front);

/// For n = d = 1: the stabilizing interval of k, shrunk by `margin` at both
/// ends, sampled with the given step.
std::vector<GainMatrix> scalar_gain_grid(const DynamicsModel& dynamics, double step,
                                         double margin = 1e-3);

/// The explicit point of the lifted convex program built from a stabilizing
/// gain: P = dlyape(A+BK, I), L = KP, G = P − I.
struct LiftingCertificate {
  Matrix P;
  Matrix L;
  Matrix G;
  double min_eig_schur = 0.0;  // λ_min [[G, AP+BL], [(AP+BL)ᵀ, P]]
  Vector objective_gap;        // Tr(QᵢP) + Tr(LP⁻¹LᵀRᵢ) − 𝓛ᵢ(K)
  Vector losses;
  bool feasible = false;
};

LiftingCertificate verify_lifting(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                                  const std::vector<CostObjective>& objectives);

struct FrontDistance {
  double weighted_sup = 0.0;
  double uniform_sup = 0.0;
};

/// Two-sided comparison: every point of either front is matched with the
/// ℓ₁-nearest weight of the other, and the gaps |wᵀ(𝓛⃗ − 𝓛⃗′)| and
/// ‖𝓛⃗ − 𝓛⃗′‖∞ are maximised. Failed entries are skipped.
FrontDistance front_distance(const ParetoFrontApprox& a, const ParetoFrontApprox& b);

}  // namespace molqr
