#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "molqr/lqr_core.hpp"

namespace molqr {

/// A point of the probability simplex Δ([m]).
class WeightVector {
 public:
  /// Throws kInvalidWeight unless every entry is ≥ 0 and they sum to 1
  /// within 1e-12. Tiny negative round-off (> −1e-15) is clamped to zero.
  explicit WeightVector(Vector w);

  static WeightVector uniform(std::size_t m);

  const Vector& values() const { return w_; }
  std::size_t m() const { return static_cast<std::size_t>(w_.size()); }
  double operator[](std::size_t i) const { return w_(static_cast<Eigen::Index>(i)); }

  double l1_distance(const WeightVector& other) const { return (w_ - other.w_).lpNorm<1>(); }

 private:
  Vector w_;
};

/// Composition grid {j/k : Σ j = k} over Δ([m]), enumerated in
/// lexicographic order of (j₁, …, j_m).
struct WeightNet {
  double epsilon = 1.0;
  std::size_t m = 1;
  int resolution = 1;
  std::vector<WeightVector> points;
};

inline constexpr double kDefaultNetPointBudget = 1e7;

/// Resolution k = ceil(2(m−1)/ε) (at least 1); covering radius in ℓ₁ ≤ ε.
/// Throws kTooFine when binomial(k+m−1, m−1) exceeds `point_budget`.
WeightNet epsilon_net(std::size_t m, double epsilon, double point_budget = kDefaultNetPointBudget);

/// binomial(k+m−1, m−1) in floating point (exact for the sizes we enumerate).
double net_size(std::size_t m, int resolution);

struct NearestPoint {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exhaustive ℓ₁ scan; ties go to the lowest index.
NearestPoint nearest_net_point(const WeightNet& net, const WeightVector& w);

/// Largest-remainder rounding of w onto the resolution-k grid. Attains the
/// minimal ℓ₁ distance to the grid; used as an O(m log m) shortcut.
WeightVector round_to_grid(const WeightVector& w, int resolution);

/// Uniform (flat Dirichlet) sample from Δ([m]).
WeightVector sample_simplex(std::size_t m, std::mt19937_64& rng);

/// Q_w = Σ wᵢQᵢ, R_w = Σ wᵢRᵢ.
std::pair<Matrix, Matrix> combine_costs(const MultiObjectiveProblem& problem,
                                        const WeightVector& w);

/// Optimal controller for one scalarization of the objectives.
struct ParetoPoint {
  WeightVector w;
  GainMatrix K;
  DareSolution dare;
  Vector losses;  // cost_vector(K)

  double scalarized_loss() const { return w.values().dot(losses); }
};

ParetoPoint solve_scalarized(const MultiObjectiveProblem& problem, const WeightVector& w,
                             const DareOptions& options = {});

}  // namespace molqr
