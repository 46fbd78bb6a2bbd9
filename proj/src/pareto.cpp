#include "molqr/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace molqr {
namespace {

class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(std::int64_t v) { add_bytes(&v, sizeof v); }
  void add(const Matrix& M) {
    add(static_cast<std::int64_t>(M.rows()));
    add(static_cast<std::int64_t>(M.cols()));
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const double v = M(i, j) == 0.0 ? 0.0 : M(i, j);  // fold -0.0
        add_bytes(&v, sizeof v);
      }
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string problem_digest(const MultiObjectiveProblem& problem) {
  Fnv1a h;
  h.add(problem.dynamics().A());
  h.add(problem.dynamics().B());
  h.add(static_cast<std::int64_t>(problem.m()));
  for (const auto& obj : problem.objectives()) {
    h.add(obj.Q);
    h.add(obj.R);
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h.value();
  return os.str();
}

ParetoFrontApprox front_over_net(const MultiObjectiveProblem& problem, const WeightNet& net,
                                 const FrontOptions& options) {
  if (net.m != problem.m()) {
    throw Error(ErrorCode::kDimensionMismatch, "net dimension differs from objective count");
  }
  ParetoFrontApprox front;
  front.epsilon = net.epsilon;
  front.net = net;
  front.problem_digest = problem_digest(problem);
  const std::size_t count = net.points.size();
  front.points.resize(count);
  std::vector<std::optional<FrontFailure>> failures(count);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        front.points[i] = solve_scalarized(problem, net.points[i], options.dare);
      } catch (const Error& e) {
        failures[i] = FrontFailure{i, e.code(), e.what()};
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(count)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  for (auto& f : failures) {
    if (f) front.failures.push_back(std::move(*f));
  }
  return front;
}

ParetoFrontApprox approximate_front(const MultiObjectiveProblem& problem, double epsilon,
                                    const FrontOptions& options) {
  return front_over_net(problem, epsilon_net(problem.m(), epsilon, options.point_budget), options);
}

bool dominates(const Vector& l1, const Vector& l2, double tol) {
  if (l1.size() != l2.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "loss vectors differ in length");
  }
  bool strict = false;
  for (Eigen::Index i = 0; i < l1.size(); ++i) {
    if (l1(i) > l2(i) + tol) return false;
    if (l1(i) < l2(i) - tol) strict = true;
  }
  return strict;
}

std::vector<std::size_t> dominance_filter(const std::vector<Vector>& losses, double tol) {
  const std::size_t count = losses.size();
  if (count == 0) return {};
  const double m = static_cast<double>(losses.front().size());
  std::vector<double> sums(count);
  for (std::size_t i = 0; i < count; ++i) sums[i] = losses[i].sum();
  std::vector<std::size_t> by_sum(count);
  std::iota(by_sum.begin(), by_sum.end(), 0);
  std::stable_sort(by_sum.begin(), by_sum.end(),
                   [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });

  // A dominator of i has coordinate sum below sums[i] + m·tol, so only a
  // prefix of the sorted order needs to be examined.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < count; ++i) {
    const double limit = sums[i] + m * tol + 1e-12 * std::max(1.0, std::abs(sums[i]));
    bool dominated = false;
    for (std::size_t pos = 0; pos < count && sums[by_sum[pos]] < limit; ++pos) {
      const std::size_t j = by_sum[pos];
      if (j != i && dominates(losses[j], losses[i], tol)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

std::vector<EvaluatedGain> brute_force_front(const MultiObjectiveProblem& problem,
                                             const std::vector<GainMatrix>& control_grid,
                                             double tol) {
  const auto& dyn = problem.dynamics();
  std::vector<EvaluatedGain> stable;
  for (const auto& K : control_grid) {
    if (!is_stabilizing(dyn.A(), dyn.B(), K)) continue;
    stable.push_back({K, cost_vector(problem, K)});
  }
  if (stable.empty()) throw Error(ErrorCode::kEmptyGrid, "no stabilizing gain in the grid");
  std::vector<Vector> losses;
  losses.reserve(stable.size());
  for (const auto& s : stable) losses.push_back(s.losses);
  std::vector<EvaluatedGain> out;
  for (std::size_t idx : dominance_filter(losses, tol)) out.push_back(std::move(stable[idx]));
  return out;
}

std::vector<GainMatrix> scalar_gain_grid(const DynamicsModel& dynamics, double step,
                                         double margin) {
  if (dynamics.n() != 1 || dynamics.d() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "scalar gain grid needs n = d = 1");
  }
  if (!(step > 0.0)) throw Error(ErrorCode::kBadInput, "step must be positive");
  const double a = dynamics.A()(0, 0);
  const double b = dynamics.B()(0, 0);
  // |a + b k| < 1
  double lo = (-1.0 - a) / b;
  double hi = (1.0 - a) / b;
  if (lo > hi) std::swap(lo, hi);
  lo += margin;
  hi -= margin;
  std::vector<GainMatrix> grid;
  const auto steps = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    grid.push_back(Matrix::Constant(1, 1, lo + static_cast<double>(i) * step));
  }
  return grid;
}

double normalized_coverage_gap(const std::vector<EvaluatedGain>& brute,
                               const ParetoFrontApprox& front) {
  if (brute.empty()) return 0.0;
  const Eigen::Index m = brute.front().losses.size();
  Vector lo = brute.front().losses;
  Vector hi = lo;
  for (const auto& b : brute) {
    lo = lo.cwiseMin(b.losses);
    hi = hi.cwiseMax(b.losses);
  }
  Vector scale(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double range = hi(i) - lo(i);
    scale(i) = range > 0.0 ? range : std::max(1.0, std::abs(hi(i)));
  }
  double worst = 0.0;
  for (const auto& b : brute) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& entry : front.points) {
      if (!entry) continue;
      best = std::min(best, (b.losses - entry->losses).cwiseQuotient(scale).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, best);
  }
  return worst;
}

LiftingCertificate verify_lifting(const DynamicsModel& dynamics, const Eigen::Ref<const Matrix>& K,
                                  const std::vector<CostObjective>& objectives) {
  if (!is_stabilizing(dynamics.A(), dynamics.B(), K)) {
    throw Error(ErrorCode::kUnstable, "lifting needs a stabilizing gain");
  }
  const Eigen::Index n = dynamics.n();
  const Matrix& A = dynamics.A();
  const Matrix& B = dynamics.B();
  LiftingCertificate cert;
  cert.P = solve_dlyap(dynamics.closed_loop(K), Matrix::Identity(n, n), LyapunovForm::kForward);
  cert.L = K * cert.P;
  cert.G = cert.P - Matrix::Identity(n, n);

  const Matrix coupling = A * cert.P + B * cert.L;
  Matrix block(2 * n, 2 * n);
  block << cert.G, coupling, coupling.transpose(), cert.P;
  cert.min_eig_schur = min_eigenvalue_sym(symmetrize(block));

  const auto m = static_cast<Eigen::Index>(objectives.size());
  cert.objective_gap.resize(m);
  cert.losses.resize(m);
  const Eigen::LLT<Matrix> P_llt(cert.P);
  const Matrix Pinv_Lt = P_llt.solve(cert.L.transpose());
  bool gaps_ok = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& obj = objectives[static_cast<std::size_t>(i)];
    const double lifted = (obj.Q * cert.P).trace() + (cert.L * Pinv_Lt * obj.R).trace();
    cert.losses(i) = cost_via_value(dynamics, K, obj.Q, obj.R);
    cert.objective_gap(i) = lifted - cert.losses(i);
    gaps_ok = gaps_ok && std::abs(cert.objective_gap(i)) <= 1e-8 * (1.0 + cert.losses(i));
  }
  cert.feasible = cert.min_eig_schur >= -1e-8 && gaps_ok;
  return cert;
}

namespace {

void accumulate_distance(const ParetoFrontApprox& from, const ParetoFrontApprox& to,
                         FrontDistance& out) {
  for (const auto& entry : from.points) {
    if (!entry) continue;
    const NearestPoint match = nearest_net_point(to.net, entry->w);
    const auto& other = to.points[match.index];
    if (!other) continue;
    const Vector gap = entry->losses - other->losses;
    out.weighted_sup = std::max(out.weighted_sup, std::abs(entry->w.values().dot(gap)));
    out.uniform_sup = std::max(out.uniform_sup, gap.cwiseAbs().maxCoeff());
  }
}

}  // namespace

FrontDistance front_distance(const ParetoFrontApprox& a, const ParetoFrontApprox& b) {
  if (a.net.m != b.net.m) {
    throw Error(ErrorCode::kDimensionMismatch, "fronts have different objective counts");
  }
  FrontDistance out;
  accumulate_distance(a, b, out);
  accumulate_distance(b, a, out);
  return out;
}

}  // namespace molqr
