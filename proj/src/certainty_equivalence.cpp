#include "molqr/certainty_equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "molqr/random.hpp"

namespace molqr {

std::string_view to_string(Provenance p) {
  return p == Provenance::kSynthetic ? "synthetic" : "identified";
}

EstimatedDynamics perturb_dynamics(const DynamicsModel& dynamics, double epsilon,
                                   std::uint64_t seed, int max_attempts) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::kBadInput, "epsilon must be nonnegative");
  EstimatedDynamics out;
  out.provenance = Provenance::kSynthetic;
  out.epsilon_dyn = epsilon;
  if (epsilon == 0.0) {
    out.A_hat = dynamics.A();
    out.B_hat = dynamics.B();
    return out;
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Matrix EA = epsilon * unit_direction(dynamics.n(), dynamics.n(), false, rng);
    const Matrix EB = epsilon * unit_direction(dynamics.n(), dynamics.d(), false, rng);
    Matrix A_hat = dynamics.A() + EA;
    Matrix B_hat = dynamics.B() + EB;
    if (!is_stabilizable(A_hat, B_hat)) continue;
    out.A_hat = std::move(A_hat);
    out.B_hat = std::move(B_hat);
    out.err_A = op_norm(EA);
    out.err_B = op_norm(EB);
    return out;
  }
  throw Error(ErrorCode::kCannotStabilize,
              "no stabilizable perturbation found within the attempt budget");
}

EstimatedDynamics identify_dynamics(const DynamicsModel& dynamics,
                                    const IdentificationOptions& options) {
  if (options.horizon < 1 || options.rollouts < 1) {
    throw Error(ErrorCode::kBadInput, "horizon and rollouts must be positive");
  }
  if (options.excitation_std < 0.0 || options.noise_std < 0.0) {
    throw Error(ErrorCode::kBadInput, "standard deviations must be nonnegative");
  }
  const Eigen::Index n = dynamics.n();
  const Eigen::Index d = dynamics.d();
  const Matrix K = options.feedback.value_or(Matrix::Zero(d, n));
  if (K.rows() != d || K.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "feedback gain must be d x n");
  }

  const Eigen::Index samples = static_cast<Eigen::Index>(options.horizon) * options.rollouts;
  Matrix regressors(n + d, samples);
  Matrix targets(n, samples);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index col = 0;
  for (int r = 0; r < options.rollouts; ++r) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
    for (int t = 0; t < options.horizon; ++t) {
      Vector u = K * x;
      for (Eigen::Index i = 0; i < d; ++i) u(i) += options.excitation_std * normal(rng);
      Vector next = dynamics.A() * x + dynamics.B() * u;
      for (Eigen::Index i = 0; i < n; ++i) next(i) += options.noise_std * normal(rng);
      regressors.col(col).head(n) = x;
      regressors.col(col).tail(d) = u;
      targets.col(col) = next;
      ++col;
      x = std::move(next);
    }
  }

  // Θ = [Â B̂] minimizes ‖targets − Θ·regressors‖_F.
  Eigen::ColPivHouseholderQR<Matrix> qr(regressors.transpose());
  qr.setThreshold(1e-10);
  if (qr.rank() < n + d) {
    throw Error(ErrorCode::kRankDeficient,
                "regressor matrix has rank " + std::to_string(qr.rank()) + " < n + d = " +
                    std::to_string(n + d));
  }
  const Matrix theta = qr.solve(targets.transpose()).transpose();

  EstimatedDynamics out;
  out.provenance = Provenance::kIdentified;
  out.A_hat = theta.leftCols(n);
  out.B_hat = theta.rightCols(d);
  out.err_A = op_norm(dynamics.A() - out.A_hat);
  out.err_B = op_norm(dynamics.B() - out.B_hat);
  out.epsilon_dyn = std::max(out.err_A, out.err_B);
  if (!is_stabilizable(out.A_hat, out.B_hat)) {
    throw Error(ErrorCode::kCannotStabilize, "identified pair is not stabilizable");
  }
  return out;
}

CEFront ce_front(const MultiObjectiveProblem& problem, const EstimatedDynamics& estimates,
                 double epsilon, const FrontOptions& options) {
  const MultiObjectiveProblem estimated(DynamicsModel(estimates.A_hat, estimates.B_hat),
                                        problem.objectives());
  CEFront out;
  out.base = approximate_front(estimated, epsilon, options);
  out.estimates = estimates;
  const auto& truth = problem.dynamics();
  const auto m = static_cast<Eigen::Index>(problem.m());
  for (const auto& entry : out.base.points) {
    if (entry && is_stabilizing(truth.A(), truth.B(), entry->K)) {
      out.true_stable_flags.push_back(true);
      out.true_losses.push_back(cost_vector(problem, entry->K));
    } else {
      out.true_stable_flags.push_back(false);
      out.true_losses.push_back(Vector::Constant(m, std::numeric_limits<double>::infinity()));
    }
  }
  return out;
}

CEReport ce_error_report(const MultiObjectiveProblem& problem, const ParetoFrontApprox& true_front,
                         const CEFront& ce) {
  const auto& a = true_front.net.points;
  const auto& b = ce.base.net.points;
  if (a.size() != b.size() || true_front.net.m != ce.base.net.m) {
    throw Error(ErrorCode::kNetMismatch, "fronts were built on different nets");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].l1_distance(b[i]) > 1e-12) {
      throw Error(ErrorCode::kNetMismatch, "net weights differ at index " + std::to_string(i));
    }
  }
  if (true_front.problem_digest != problem_digest(problem)) {
    throw Error(ErrorCode::kNetMismatch, "true front was built for a different problem");
  }

  CEReport report;
  report.epsilon_dyn = ce.estimates.epsilon_dyn;
  report.provenance = ce.estimates.provenance;
  std::size_t stable = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CEWeightError row;
    row.w = a[i].values();
    row.stable_true = ce.true_stable_flags[i];
    const auto& truth = true_front.points[i];
    if (row.stable_true && truth) {
      ++stable;
      const Vector gap = truth->losses - ce.true_losses[i];
      row.weighted_err = std::abs(row.w.dot(gap));
      row.uniform_err = gap.cwiseAbs().maxCoeff();
      report.sup_weighted = std::max(report.sup_weighted, row.weighted_err);
      report.sup_uniform = std::max(report.sup_uniform, row.uniform_err);
    } else {
      row.stable_true = false;
      row.weighted_err = std::numeric_limits<double>::infinity();
      row.uniform_err = std::numeric_limits<double>::infinity();
    }
    report.per_weight.push_back(std::move(row));
  }
  report.stable_fraction = a.empty() ? 0.0 : static_cast<double>(stable) / static_cast<double>(a.size());
  return report;
}

}  // namespace molqr
