#include "molqr/lqr_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "molqr/error.hpp"

namespace molqr {
namespace {

constexpr double kSigmaMinTol = 1e-12;

void require_stabilizing(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K) {
  if (K.rows() != dynamics.d() || K.cols() != dynamics.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "gain must be d x n");
  }
  if (!is_stabilizing(dynamics.A(), dynamics.B(), K)) {
    throw Error(ErrorCode::kUnstable, "gain does not stabilize the dynamics; loss is infinite");
  }
}

void require_cost_shapes(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& Q,
                         const Eigen::Ref<const Matrix>& R) {
  if (Q.rows() != dynamics.n() || Q.cols() != dynamics.n() || R.rows() != dynamics.d() ||
      R.cols() != dynamics.d()) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrices do not match the dynamics");
  }
}

}  // namespace

DynamicsModel::DynamicsModel(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
  if (A_.rows() < 1 || A_.rows() != A_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "A must be square with n >= 1");
  }
  if (B_.rows() != A_.rows() || B_.cols() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "B must be n x d with d >= 1");
  }
  if (!A_.allFinite() || !B_.allFinite()) {
    throw Error(ErrorCode::kBadInput, "dynamics contain non-finite entries");
  }
  if (!is_stabilizable(A_, B_)) {
    throw Error(ErrorCode::kNotStabilizable, "(A, B) fails the PBH stabilizability test");
  }
  const Matrix In = Matrix::Identity(n(), n());
  const Matrix Id = Matrix::Identity(d(), d());
  try {
    solve_dare(A_, B_, In, Id);
  } catch (const Error& e) {
    throw Error(ErrorCode::kNotStabilizable, std::string("DARE with Q = R = I failed: ") + e.what());
  }
}

CostObjective CostObjective::make(Matrix Q, Matrix R, std::string label, bool normalize) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Q and R must be square");
  }
  if (!is_symmetric(Q) || !is_symmetric(R)) {
    throw Error(ErrorCode::kBadInput, "objective '" + label + "' has a non-symmetric Q or R");
  }
  Q = symmetrize(Q);
  R = symmetrize(R);
  const double sigma = std::min(min_eigenvalue_sym(Q), min_eigenvalue_sym(R));
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kBadInput, "objective '" + label + "' is not positive definite");
  }
  CostObjective out;
  if (normalize) {
    out.scale = 1.0 / sigma;
    Q *= out.scale;
    R *= out.scale;
    std::ostringstream os;
    os.precision(17);
    os << label << " [scaled x" << out.scale << "]";
    label = os.str();
  } else if (sigma < 1.0 - kSigmaMinTol) {
    std::ostringstream os;
    os << "objective '" << label << "' has sigma_min " << sigma
       << " < 1; pass normalize to rescale";
    throw Error(ErrorCode::kBadInput, os.str());
  }
  out.Q = std::move(Q);
  out.R = std::move(R);
  out.label = std::move(label);
  return out;
}

MultiObjectiveProblem::MultiObjectiveProblem(DynamicsModel dynamics,
                                             std::vector<CostObjective> objectives)
    : dynamics_(std::move(dynamics)), objectives_(std::move(objectives)) {
  if (objectives_.empty()) throw Error(ErrorCode::kBadInput, "at least one objective required");
  for (const auto& obj : objectives_) {
    require_cost_shapes(dynamics_, obj.Q, obj.R);
  }
}

OptimalGain optimal_gain(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& Q,
                         const Eigen::Ref<const Matrix>& R, const DareOptions& options) {
  require_cost_shapes(dynamics, Q, R);
  OptimalGain out;
  out.dare = solve_dare(dynamics.A(), dynamics.B(), Q, R, options);
  const Matrix& P = out.dare.P;
  const Matrix& A = dynamics.A();
  const Matrix& B = dynamics.B();
  const Matrix BtP = B.transpose() * P;
  out.K = -(symmetrize(R + BtP * B)).ldlt().solve(BtP * A);
  return out;
}

double cost_via_value(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                      const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R) {
  require_stabilizing(dynamics, K);
  require_cost_shapes(dynamics, Q, R);
  const Matrix PK = solve_dlyap(dynamics.closed_loop(K), Q + K.transpose() * R * K,
                                LyapunovForm::kTransposed);
  return PK.trace();
}

double cost_via_gramian(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                        const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R) {
  require_stabilizing(dynamics, K);
  require_cost_shapes(dynamics, Q, R);
  const Matrix gramian = solve_dlyap(dynamics.closed_loop(K),
                                     Matrix::Identity(dynamics.n(), dynamics.n()),
                                     LyapunovForm::kForward);
  return ((Q + K.transpose() * R * K) * gramian).trace();
}

Vector cost_vector(const MultiObjectiveProblem& problem, const Eigen::Ref<const Matrix>& K) {
  const auto& objectives = problem.objectives();
  Vector out(static_cast<Eigen::Index>(objectives.size()));
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) =
        cost_via_value(problem.dynamics(), K, objectives[i].Q, objectives[i].R);
  }
  return out;
}

double cost_difference_exact(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                             const Eigen::Ref<const Matrix>& K_prime,
                             const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R) {
  require_stabilizing(dynamics, K);
  require_stabilizing(dynamics, K_prime);
  require_cost_shapes(dynamics, Q, R);
  const Matrix& A = dynamics.A();
  const Matrix& B = dynamics.B();
  const Matrix gramian_prime =
      solve_dlyap(dynamics.closed_loop(K_prime), Matrix::Identity(dynamics.n(), dynamics.n()),
                  LyapunovForm::kForward);
  const Matrix PK =
      solve_dlyap(dynamics.closed_loop(K), Q + K.transpose() * R * K, LyapunovForm::kTransposed);
  const Matrix curvature = R + B.transpose() * PK * B;
  const Matrix EK = curvature * K + B.transpose() * PK * A;
  const Matrix delta = K - K_prime;
  return -2.0 * (gramian_prime * delta.transpose() * EK).trace() +
         (gramian_prime * delta.transpose() * curvature * delta).trace();
}

CostEstimate simulate_cost(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                           const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                           int horizon, int rollouts, std::uint64_t seed, SimulationMode mode) {
  require_stabilizing(dynamics, K);
  require_cost_shapes(dynamics, Q, R);
  if (horizon < 1 || rollouts < 1) {
    throw Error(ErrorCode::kBadInput, "horizon and rollouts must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix L = dynamics.closed_loop(K);
  // Stage cost xᵀ(Q + KᵀRK)x under u = Kx.
  const Matrix stage = Q + K.transpose() * R * K;

  double sum = 0.0;
  double sum_sq = 0.0;
  Vector x(dynamics.n());
  for (int r = 0; r < rollouts; ++r) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    double total = 0.0;
    for (int t = 0; t < horizon; ++t) {
      total += x.dot(stage * x);
      x = L * x;
    }
    if (mode == SimulationMode::kTimeAveraged) total /= horizon;
    sum += total;
    sum_sq += total * total;
  }
  CostEstimate out;
  out.estimate = sum / rollouts;
  if (rollouts > 1) {
    const double var = std::max(0.0, (sum_sq - rollouts * out.estimate * out.estimate) /
                                         (rollouts - 1));
    out.std_error = std::sqrt(var / rollouts);
  }
  return out;
}

}  // namespace molqr
