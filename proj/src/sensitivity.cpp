#include "molqr/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "molqr/random.hpp"

namespace molqr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_inverse_norm(const std::vector<CostObjective>& objectives) {
  double out = 0.0;
  for (const auto& obj : objectives) out = std::max(out, 1.0 / min_eigenvalue_sym(obj.R));
  return out;
}

double uniform_r_bar(const MultiObjectiveProblem& problem) {
  return 1.0 + static_cast<double>(problem.m()) * max_inverse_norm(problem.objectives());
}

}  // namespace

ClosedFormBound p_max_bound(const MultiObjectiveProblem& problem) {
  const Matrix& A = problem.dynamics().A();
  const Matrix& B = problem.dynamics().B();
  const auto& objectives = problem.objectives();
  const double m = static_cast<double>(problem.m());

  double lam_n_each = 0.0;
  double q_top = 0.0;
  Matrix R_sum = Matrix::Zero(B.cols(), B.cols());
  for (const auto& obj : objectives) {
    const Matrix S = symmetrize(B * obj.R.llt().solve(B.transpose()));
    lam_n_each = std::max(lam_n_each, std::max(0.0, min_eigenvalue_sym(S)));
    q_top = std::max(q_top, max_eigenvalue_sym(obj.Q));
    R_sum += obj.R;
  }
  const Matrix S_sum = symmetrize(B * R_sum.llt().solve(B.transpose()));
  const double lam_n_sum = min_eigenvalue_sym(S_sum);
  const double a_bar = 1.0 + max_eigenvalue_sym(A * A.transpose()) + m * m * q_top * lam_n_each;

  ClosedFormBound out;
  if (lam_n_sum <= 1e-12 * std::max(1.0, max_eigenvalue_sym(S_sum))) {
    out.value = kInf;
    out.degenerate_b = true;
    return out;
  }
  out.value = (std::sqrt(a_bar * a_bar + 4.0 * m * m * lam_n_each * q_top) + a_bar) /
              (2.0 * lam_n_sum);
  return out;
}

ClosedFormBound k_max_bound(const MultiObjectiveProblem& problem) {
  const ClosedFormBound p = p_max_bound(problem);
  const double factor = static_cast<double>(problem.m()) * max_inverse_norm(problem.objectives()) *
                        op_norm(problem.dynamics().B()) * op_norm(problem.dynamics().A());
  if (p.degenerate_b) return {factor == 0.0 ? 0.0 : kInf, true};
  return {factor * p.value, false};
}

StabilityMargins estimate_margins(const DynamicsModel& dynamics, const ParetoFrontApprox& front,
                                  std::optional<double> rho_slack, int k_max) {
  std::vector<Matrix> loops;
  double max_rho = 0.0;
  for (const auto& entry : front.points) {
    if (!entry) continue;
    loops.push_back(dynamics.closed_loop(entry->K));
    const double rho = spectral_radius(loops.back());
    if (!(rho < 1.0)) {
      std::ostringstream os;
      os << "front gain at weight index " << loops.size() - 1 << " has spectral radius " << rho;
      throw Error(ErrorCode::kUnstablePoint, os.str());
    }
    max_rho = std::max(max_rho, rho);
  }
  if (loops.empty()) throw Error(ErrorCode::kBadInput, "front has no solved points");

  StabilityMargins out;
  out.max_spectral_radius = max_rho;
  out.rho_slack = rho_slack.value_or(0.05 * (1.0 - max_rho));
  out.gamma_bar = std::min(1.0 - 1e-6, max_rho + out.rho_slack);
  out.sampled_weights = loops.size();
  out.certified = true;
  out.tau_bar = 1.0;
  for (const auto& L : loops) {
    try {
      const GrowthRate g = growth_rate_tau(L, out.gamma_bar, k_max);
      out.tau_bar = std::max(out.tau_bar, g.tau);
      out.certified = out.certified && g.tail_certified;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDiverging) throw;
      out.tau_bar = kInf;
      out.certified = false;
    }
  }
  return out;
}

ContractionConstants contraction_constants(const Eigen::Ref<const Matrix>& L, double rho,
                                           const Eigen::Ref<const Matrix>& S,
                                           const Eigen::Ref<const Matrix>& A,
                                           const Eigen::Ref<const Matrix>& B,
                                           const Eigen::Ref<const Matrix>& P, double r_bar) {
  if (!(rho < 1.0)) throw Error(ErrorCode::kBadInput, "rho must be below 1");
  const GrowthRate g = growth_rate_tau(L, rho);
  const double kappa = g.tau * g.tau / (1.0 - rho * rho);
  const double nl = op_norm(L);
  const double ap = norm_plus(A);
  const double bp = norm_plus(B);
  const double pp = norm_plus(P);
  ContractionConstants c;
  c.tau = g.tau;
  c.c1 = kappa * nl * nl * op_norm(S);
  c.c2 = 8.0 * kappa * ap * ap * pp * pp * bp * bp * r_bar * r_bar;
  c.c3 = 3.0 * c.c1;
  c.c4 = 44.0 * kappa * pp * pp * pp * ap * ap * std::pow(bp, 5) * r_bar * r_bar * r_bar;
  return c;
}

SensitivityConstants gamma_constant(const MultiObjectiveProblem& problem,
                                    const StabilityMargins& margins,
                                    const ParetoFrontApprox& front, std::size_t reference_index) {
  if (reference_index >= front.points.size() || !front.points[reference_index]) {
    throw Error(ErrorCode::kBadInput, "reference weight is not a solved front point");
  }
  const auto& dyn = problem.dynamics();
  const auto& objectives = problem.objectives();
  const double m = static_cast<double>(problem.m());

  SensitivityConstants out;
  const ClosedFormBound p = p_max_bound(problem);
  const ClosedFormBound k = k_max_bound(problem);
  out.p_max = p.value;
  out.k_max = k.value;
  out.degenerate_b = p.degenerate_b;
  out.r_bar = uniform_r_bar(problem);

  double q_top = 0.0;
  double r_top = 0.0;
  for (const auto& obj : objectives) {
    q_top = std::max(q_top, op_norm(obj.Q));
    r_top = std::max(r_top, op_norm(obj.R));
  }
  out.gamma_cap = std::max({1.0 + out.p_max, 1.0 + out.k_max, norm_plus(dyn.A()),
                            norm_plus(dyn.B()), q_top, r_top,
                            1.0 + m * max_inverse_norm(objectives)});

  auto constants_at = [&](const ParetoPoint& point) {
    const auto [Qw, Rw] = combine_costs(problem, point.w);
    const Matrix S = symmetrize(dyn.B() * Rw.llt().solve(dyn.B().transpose()));
    return contraction_constants(dyn.closed_loop(point.K), margins.gamma_bar, S, dyn.A(),
                                 dyn.B(), point.dare.P, out.r_bar);
  };

  const ParetoPoint& ref = *front.points[reference_index];
  out.reference.index = reference_index;
  out.reference.w = ref.w.values();
  out.reference.norm_a = op_norm(dyn.A());
  out.reference.norm_b = op_norm(dyn.B());
  out.reference.norm_p = op_norm(ref.dare.P);
  out.reference.norm_l = op_norm(dyn.closed_loop(ref.K));
  out.reference.sigma_min_p = min_eigenvalue_sym(ref.dare.P);
  {
    const auto [Qw, Rw] = combine_costs(problem, ref.w);
    out.reference.norm_s = op_norm(dyn.B() * Rw.llt().solve(dyn.B().transpose()));
  }
  if (out.reference.sigma_min_p < 1.0 - 1e-9) {
    std::ostringstream os;
    os << "sigma_min(P) = " << out.reference.sigma_min_p
       << " < 1; the objectives violate sigma_min(Q), sigma_min(R) >= 1";
    throw Error(ErrorCode::kBadInput, os.str());
  }
  out.at_reference = constants_at(ref);

  for (const auto& entry : front.points) {
    if (!entry) continue;
    const ContractionConstants c = constants_at(*entry);
    out.worst_case.c1 = std::max(out.worst_case.c1, c.c1);
    out.worst_case.c2 = std::max(out.worst_case.c2, c.c2);
    out.worst_case.c3 = std::max(out.worst_case.c3, c.c3);
    out.worst_case.c4 = std::max(out.worst_case.c4, c.c4);
    out.worst_case.tau = std::max(out.worst_case.tau, c.tau);
  }
  return out;
}

PerturbationBound dare_perturbation_bound(const SensitivityConstants& constants,
                                          const StabilityMargins& margins, double epsilon,
                                          double universal_c, double universal_c_validity) {
  const auto& ref = constants.reference;
  const double rho = margins.gamma_bar;
  const double tau = margins.tau_bar;
  const double one_minus = 1.0 - rho * rho;
  const double ap = ref.norm_a + 1.0;
  const double bp = ref.norm_b + 1.0;
  const double pp = ref.norm_p + 1.0;
  const double lp = ref.norm_l + 1.0;
  const double r = constants.r_bar;

  PerturbationBound out;
  out.bound = universal_c * tau * tau / one_minus * ap * ap * pp * pp * bp * bp * r * r * epsilon;
  out.validity_threshold = universal_c_validity * std::pow(one_minus, 4) / std::pow(tau, 4) /
                           (ap * ap) / (pp * pp * pp) / std::pow(bp, 4) / (r * r * r) / (lp * lp);
  return out;
}

double gain_perturbation_bound(const SensitivityConstants& constants, double dP) {
  return 7.0 * std::pow(constants.gamma_cap, 4) * dP;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

PerturbationReport empirical_dare_sensitivity(const MultiObjectiveProblem& problem,
                                              const WeightVector& w,
                                              const std::vector<double>& epsilons,
                                              const PerturbationDirections& directions,
                                              std::uint64_t seed, double universal_c) {
  WeightNet single;
  single.epsilon = 1.0;
  single.m = problem.m();
  single.points = {w};
  const ParetoFrontApprox front = front_over_net(problem, single);
  if (!front.points[0]) {
    throw Error(front.failures.front().code, "reference solve failed: " + front.failures.front().message);
  }
  const ParetoPoint& ref = *front.points[0];

  PerturbationReport report;
  report.universal_c = universal_c;
  report.margins = estimate_margins(problem.dynamics(), front);
  report.constants = gamma_constant(problem, report.margins, front, 0);
  report.validity_threshold =
      dare_perturbation_bound(report.constants, report.margins, 0.0, universal_c).validity_threshold;

  const auto& dyn = problem.dynamics();
  const auto [Qw, Rw] = combine_costs(problem, w);
  std::mt19937_64 rng(seed);
  const Matrix dQ = directions.q ? unit_direction(dyn.n(), dyn.n(), true, rng)
                                 : Matrix::Zero(dyn.n(), dyn.n());
  const Matrix dR = directions.r ? unit_direction(dyn.d(), dyn.d(), true, rng)
                                 : Matrix::Zero(dyn.d(), dyn.d());
  const Matrix dA = directions.a ? unit_direction(dyn.n(), dyn.n(), false, rng)
                                 : Matrix::Zero(dyn.n(), dyn.n());
  const Matrix dB = directions.b ? unit_direction(dyn.n(), dyn.d(), false, rng)
                                 : Matrix::Zero(dyn.n(), dyn.d());

  for (const double eps : epsilons) {
    report.epsilons.push_back(eps);
    report.theoretical_bound.push_back(
        dare_perturbation_bound(report.constants, report.margins, eps, universal_c).bound);
    report.inside_validity.push_back(eps <= report.validity_threshold);
    try {
      const Matrix A_eps = dyn.A() + eps * dA;
      const Matrix B_eps = dyn.B() + eps * dB;
      if (!is_stabilizable(A_eps, B_eps)) {
        throw Error(ErrorCode::kPerturbedUnstabilizable, "perturbed pair is not stabilizable");
      }
      const DareSolution perturbed = solve_dare(A_eps, B_eps, Qw + eps * dQ, Rw + eps * dR);
      report.empirical_dP.push_back(op_norm(ref.dare.P - perturbed.P));
      report.skipped.push_back(false);
      report.notes.emplace_back();
    } catch (const Error& e) {
      report.empirical_dP.push_back(std::numeric_limits<double>::quiet_NaN());
      report.skipped.push_back(true);
      report.notes.emplace_back(e.what());
    }
  }
  report.slope_loglog = loglog_slope(report.epsilons, report.empirical_dP);
  return report;
}

}  // namespace molqr
