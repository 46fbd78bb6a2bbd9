#include "molqr/scalarization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "molqr/error.hpp"

namespace molqr {

WeightVector::WeightVector(Vector w) : w_(std::move(w)) {
  if (w_.size() < 1) throw Error(ErrorCode::kInvalidWeight, "weight vector is empty");
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_(i)) || w_(i) < -1e-15) {
      throw Error(ErrorCode::kInvalidWeight, "weights must be nonnegative");
    }
    w_(i) = std::max(0.0, w_(i));
  }
  if (std::abs(w_.sum() - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights must sum to 1, got " << w_.sum();
    throw Error(ErrorCode::kInvalidWeight, os.str());
  }
}

WeightVector WeightVector::uniform(std::size_t m) {
  return WeightVector(Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m)));
}

double net_size(std::size_t m, int resolution) {
  // binomial(k + m − 1, m − 1) as a running product.
  double out = 1.0;
  for (std::size_t i = 1; i < m; ++i) {
    out = out * static_cast<double>(resolution + static_cast<int>(i)) / static_cast<double>(i);
  }
  return std::round(out);
}

WeightNet epsilon_net(std::size_t m, double epsilon, double point_budget) {
  if (m < 1) throw Error(ErrorCode::kBadInput, "m must be at least 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::kBadInput, "epsilon must lie in (0, 1]");
  }
  const double raw = 2.0 * static_cast<double>(m - 1) / epsilon;
  const double k_real = std::max(1.0, std::ceil(raw - 1e-9));
  if (k_real > 1e9 || net_size(m, static_cast<int>(std::min(k_real, 1e9))) > point_budget) {
    std::ostringstream os;
    os << "net at epsilon " << epsilon << " for m = " << m << " exceeds the point budget "
       << point_budget;
    throw Error(ErrorCode::kTooFine, os.str());
  }
  WeightNet net;
  net.epsilon = epsilon;
  net.m = m;
  net.resolution = static_cast<int>(k_real);
  net.points.reserve(static_cast<std::size_t>(net_size(m, net.resolution)));

  const int k = net.resolution;
  std::vector<int> parts(m, 0);
  // Lexicographic enumeration of compositions of k into m nonnegative parts.
  auto emit = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == m) {
      parts[pos] = remaining;
      Vector w(static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < m; ++i) {
        w(static_cast<Eigen::Index>(i)) = static_cast<double>(parts[i]) / k;
      }
      w /= w.sum();
      net.points.emplace_back(std::move(w));
      return;
    }
    for (int j = 0; j <= remaining; ++j) {
      parts[pos] = j;
      self(self, pos + 1, remaining - j);
    }
  };
  emit(emit, 0, k);
  return net;
}

NearestPoint nearest_net_point(const WeightNet& net, const WeightVector& w) {
  if (w.m() != net.m) throw Error(ErrorCode::kDimensionMismatch, "weight and net differ in m");
  NearestPoint best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < net.points.size(); ++i) {
    const double dist = net.points[i].l1_distance(w);
    if (dist < best.distance) best = {i, dist};
  }
  return best;
}

WeightVector round_to_grid(const WeightVector& w, int resolution) {
  const auto m = static_cast<Eigen::Index>(w.m());
  std::vector<int> parts(static_cast<std::size_t>(m));
  std::vector<double> frac(static_cast<std::size_t>(m));
  int assigned = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double scaled = w.values()(i) * resolution;
    const double fl = std::floor(scaled);
    parts[static_cast<std::size_t>(i)] = static_cast<int>(fl);
    frac[static_cast<std::size_t>(i)] = scaled - fl;
    assigned += static_cast<int>(fl);
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (int r = 0; r < resolution - assigned; ++r) ++parts[order[static_cast<std::size_t>(r)]];
  Vector out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out(i) = static_cast<double>(parts[static_cast<std::size_t>(i)]) / resolution;
  }
  out /= out.sum();
  return WeightVector(std::move(out));
}

WeightVector sample_simplex(std::size_t m, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  Vector w(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = exp1(rng);
  w /= w.sum();
  return WeightVector(std::move(w));
}

std::pair<Matrix, Matrix> combine_costs(const MultiObjectiveProblem& problem,
                                        const WeightVector& w) {
  const auto& objectives = problem.objectives();
  if (w.m() != objectives.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight length differs from objective count");
  }
  Matrix Qw = Matrix::Zero(problem.dynamics().n(), problem.dynamics().n());
  Matrix Rw = Matrix::Zero(problem.dynamics().d(), problem.dynamics().d());
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    Qw += w[i] * objectives[i].Q;
    Rw += w[i] * objectives[i].R;
  }
  return {symmetrize(Qw), symmetrize(Rw)};
}

ParetoPoint solve_scalarized(const MultiObjectiveProblem& problem, const WeightVector& w,
                             const DareOptions& options) {
  auto [Qw, Rw] = combine_costs(problem, w);
  OptimalGain gain = optimal_gain(problem.dynamics(), Qw, Rw, options);
  Vector losses = cost_vector(problem, gain.K);
  return ParetoPoint{w, std::move(gain.K), std::move(gain.dare), std::move(losses)};
}

}  // namespace molqr
