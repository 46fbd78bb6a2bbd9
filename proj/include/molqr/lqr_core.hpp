#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molqr/linalg.hpp"
#include "molqr/solvers.hpp"

namespace molqr {

using GainMatrix = Matrix;

/// x_{t+1} = A x_t + B u_t. Construction rejects non-stabilizable pairs.
class DynamicsModel {
 public:
  DynamicsModel(Matrix A, Matrix B);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index d() const { return B_.cols(); }

  Matrix closed_loop(const Eigen::Ref<const Matrix>& K) const { return A_ + B_ * K; }

 private:
  Matrix A_;
  Matrix B_;
};

/// A (Q, R) pair. Both must be symmetric with σ_min ≥ 1 unless `normalize`
/// is set, in which case the pair is rescaled by 1/min(σ_min(Q), σ_min(R))
/// and the factor is kept in `scale` and appended to the label.
struct CostObjective {
  Matrix Q;
  Matrix R;
  std::string label;
  double scale = 1.0;

  static CostObjective make(Matrix Q, Matrix R, std::string label = {}, bool normalize = false);
};

class MultiObjectiveProblem {
 public:
  MultiObjectiveProblem(DynamicsModel dynamics, std::vector<CostObjective> objectives);

  const DynamicsModel& dynamics() const { return dynamics_; }
  const std::vector<CostObjective>& objectives() const { return objectives_; }
  std::size_t m() const { return objectives_.size(); }

 private:
  DynamicsModel dynamics_;
  std::vector<CostObjective> objectives_;
};

struct OptimalGain {
  GainMatrix K;
  DareSolution dare;
};

/// K = −(R + BᵀPB)⁻¹BᵀPA with P the stabilizing DARE solution.
OptimalGain optimal_gain(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& Q,
                         const Eigen::Ref<const Matrix>& R, const DareOptions& options = {});

/// Expected cumulative cost from x₀ ~ N(0, I): Tr(P_K) with
/// P_K = (A+BK)ᵀP_K(A+BK) + Q + KᵀRK. Throws kUnstable for non-stabilizing K.
double cost_via_value(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                      const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R);

/// Same quantity through the state Gramian: Tr((Q + KᵀRK)·P^L_K) with
/// P^L_K = (A+BK)P^L_K(A+BK)ᵀ + I.
double cost_via_gramian(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                        const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R);

/// Entry i is the cost under objective i.
Vector cost_vector(const MultiObjectiveProblem& problem, const Eigen::Ref<const Matrix>& K);

/// 𝓛(K′) − 𝓛(K) through the exact expansion around K:
///   −2 Tr(P^L_{K′} (K−K′)ᵀ E_K) + Tr(P^L_{K′} (K−K′)ᵀ (R + BᵀP_K B)(K−K′)),
/// E_K = (R + BᵀP_K B)K + BᵀP_K A.
double cost_difference_exact(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                             const Eigen::Ref<const Matrix>& K_prime,
                             const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R);

enum class SimulationMode {
  kCumulative,    // Σ_{t<T} cost_t, estimates Tr(P_K) as T → ∞
  kTimeAveraged,  // (1/T) Σ_{t<T} cost_t, tends to 0 for stabilizing K
};

struct CostEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo rollouts of the noiseless closed loop from x₀ ~ N(0, I).
CostEstimate simulate_cost(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                           const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                           int horizon, int rollouts, std::uint64_t seed,
                           SimulationMode mode = SimulationMode::kCumulative);

}  // namespace molqr
