#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "molqr/pareto.hpp"

namespace molqr {

/// A closed-form upper bound that may be infinite when B(ΣRⱼ)⁻¹Bᵀ is
/// singular (d < n, or rank-deficient B).
struct ClosedFormBound {
  double value = 0.0;
  bool degenerate_b = false;
};

/// Bound on max_w ‖dare(A, B, Q_w, R_w)‖:
///   (√(ā² + 4m²·maxⱼλ_n(BRⱼ⁻¹Bᵀ)·maxⱼλ₁(Qⱼ)) + ā) / (2λ_n(B(ΣⱼRⱼ)⁻¹Bᵀ)),
///   ā = 1 + λ₁(AAᵀ) + m²·maxⱼλ₁(Qⱼ)·maxⱼλ_n(BRⱼ⁻¹Bᵀ).
ClosedFormBound p_max_bound(const MultiObjectiveProblem& problem);

/// Bound on max_w ‖K_w‖: m·maxⱼ‖Rⱼ⁻¹‖·‖B‖·‖A‖·P_max.
ClosedFormBound k_max_bound(const MultiObjectiveProblem& problem);

/// Stability margins sampled over a solved net. γ̄ caps every sampled
/// ρ(A + BK_w); τ̄ caps τ(A + BK_w, γ̄). Values hold at net resolution only.
struct StabilityMargins {
  double gamma_bar = 0.0;
  double tau_bar = 1.0;
  double max_spectral_radius = 0.0;
  double rho_slack = 0.0;
  std::size_t sampled_weights = 0;
  bool certified = false;  // τ tail-certified at every sample
};

/// rho_slack defaults to 0.05·(1 − max ρ). Throws kUnstablePoint if a front
/// gain does not stabilize and kBadInput for an empty front.
StabilityMargins estimate_margins(const DynamicsModel& dynamics, const ParetoFrontApprox& front,
                                  std::optional<double> rho_slack = std::nullopt,
                                  int k_max = 500);

struct ContractionConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double tau = 1.0;
};

/// With κ = τ(L, ρ)²/(1 − ρ²):
///   C1 = κ‖L‖²‖S‖,  C2 = 8κ‖A‖₊²‖P‖₊²‖B‖₊²r̄²,  C3 = 3·C1,
///   C4 = 44κ‖P‖₊³‖A‖₊²‖B‖₊⁵r̄³.
/// Throws kDiverging when τ(L, ρ) is infinite and kBadInput unless ρ < 1.
ContractionConstants contraction_constants(const Eigen::Ref<const Matrix>& L, double rho,
                                           const Eigen::Ref<const Matrix>& S,
                                           const Eigen::Ref<const Matrix>& A,
                                           const Eigen::Ref<const Matrix>& B,
                                           const Eigen::Ref<const Matrix>& P, double r_bar);

/// Norms at the weight the contraction constants were evaluated for.
struct ReferenceQuantities {
  std::size_t index = 0;
  Vector w;
  double norm_a = 0.0;
  double norm_b = 0.0;
  double norm_p = 0.0;
  double norm_l = 0.0;
  double norm_s = 0.0;
  double sigma_min_p = 0.0;
};

struct SensitivityConstants {
  double p_max = 0.0;
  double k_max = 0.0;
  double gamma_cap = 1.0;  // Γ
  double r_bar = 1.0;
  bool degenerate_b = false;
  ContractionConstants at_reference;
  ContractionConstants worst_case;  // entrywise max over the solved net
  ReferenceQuantities reference;
};

/// Γ = max{1 + P_max, 1 + K_max, ‖A‖₊, ‖B‖₊, maxⱼ‖Qⱼ‖, maxⱼ‖Rⱼ‖, 1 + m·maxⱼ‖Rⱼ⁻¹‖}
/// from the closed-form bounds, plus C1–C4 at front point `reference_index`
/// with ρ = γ̄ and r̄ = 1 + m·maxⱼ‖Rⱼ⁻¹‖.
SensitivityConstants gamma_constant(const MultiObjectiveProblem& problem,
                                    const StabilityMargins& margins,
                                    const ParetoFrontApprox& front,
                                    std::size_t reference_index = 0);

struct PerturbationBound {
  double bound = 0.0;
  double validity_threshold = 0.0;
};

/// DARE perturbation bound (up to universal constants):
///   bound = c·τ̄²/(1−γ̄²)·‖A‖₊²‖P‖₊²‖B‖₊²r̄²·ε,
///   threshold = c′·(1−γ̄²)⁴/τ̄⁴·‖A‖₊⁻²‖P‖₊⁻³‖B‖₊⁻⁴r̄⁻³‖L‖₊⁻².
PerturbationBound dare_perturbation_bound(const SensitivityConstants& constants,
                                          const StabilityMargins& margins, double epsilon,
                                          double universal_c = 1.0,
                                          double universal_c_validity = 1.0);

/// 7Γ⁴·dP.
double gain_perturbation_bound(const SensitivityConstants& constants, double dP);

struct PerturbationDirections {
  bool q = true;
  bool r = true;
  bool a = false;
  bool b = false;
};

struct PerturbationReport {
  std::vector<double> epsilons;
  std::vector<double> empirical_dP;
  std::vector<double> theoretical_bound;
  std::vector<bool> inside_validity;
  std::vector<bool> skipped;
  std::vector<std::string> notes;
  double slope_loglog = 0.0;  // NaN when fewer than two usable samples
  double universal_c = 1.0;
  double validity_threshold = 0.0;
  StabilityMargins margins;
  SensitivityConstants constants;
};

/// Perturbs the scalarized problem at w along fixed random directions of
/// spectral norm exactly ε (symmetric for Q and R), re-solves the DARE and
/// records ‖P − P_ε‖ together with the bound above and a log-log slope fit.
PerturbationReport empirical_dare_sensitivity(const MultiObjectiveProblem& problem,
                                              const WeightVector& w,
                                              const std::vector<double>& epsilons,
                                              const PerturbationDirections& directions,
                                              std::uint64_t seed, double universal_c = 1.0);

/// Least-squares slope of log y against log x over pairs with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace molqr
