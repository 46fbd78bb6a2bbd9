#include "molqr/sensitivity.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "molqr/error.hpp"
#include "support/oracles.hpp"
#include "support/systems.hpp"

namespace molqr {
namespace {

using testing::scalar;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no molqr::Error thrown";
  return ErrorCode::kBadInput;
}

const double kSqrt2 = std::sqrt(2.0);

GTEST_TEST(PMaxBound, ScalarFormula) {
  const ClosedFormBound zero = p_max_bound(testing::sys0());
  EXPECT_FALSE(zero.degenerate_b);
  EXPECT_NEAR(zero.value, 1.0 + kSqrt2, 1e-14);
  const ClosedFormBound golden = p_max_bound(testing::golden());
  EXPECT_NEAR(golden.value, (std::sqrt(13.0) + 3.0) / 2.0, 1e-14);
  EXPECT_GE(golden.value, 1.618033988749895);
}

GTEST_TEST(PMaxBound, DegenerateB) {
  const MultiObjectiveProblem p(
      DynamicsModel((Matrix(2, 2) << 0.5, 0, 0, 0.5).finished(), (Matrix(2, 1) << 1, 0).finished()),
      {CostObjective::make(Matrix::Identity(2, 2), scalar(1))});
  const ClosedFormBound b = p_max_bound(p);
  EXPECT_TRUE(b.degenerate_b);
  EXPECT_TRUE(std::isinf(b.value));
  EXPECT_TRUE(k_max_bound(p).degenerate_b);
}

GTEST_TEST(KMaxBound, Examples) {
  EXPECT_EQ(k_max_bound(testing::sys0()).value, 0.0);
  EXPECT_NEAR(k_max_bound(testing::golden()).value, (std::sqrt(13.0) + 3.0) / 2.0, 1e-14);
  const MultiObjectiveProblem sys2 = testing::sys2();
  EXPECT_NEAR(k_max_bound(sys2).value, 2 * 1 * 1 * 0.9 * p_max_bound(sys2).value, 1e-12);
}

GTEST_TEST(ClosedFormBounds, DominateNetSweep) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 5; ++trial) {
    const MultiObjectiveProblem p = testing::random_problem(2, 2, 2, rng);
    const ParetoFrontApprox f = approximate_front(p, 0.02);
    double p_emp = 0.0;
    double k_emp = 0.0;
    for (const auto& e : f.points) {
      p_emp = std::max(p_emp, op_norm(e->dare.P));
      k_emp = std::max(k_emp, op_norm(e->K));
    }
    EXPECT_GE(p_max_bound(p).value, p_emp);
    EXPECT_GE(k_max_bound(p).value, k_emp);
  }
}

GTEST_TEST(EstimateMargins, GoldenSingleLoop) {
  const MultiObjectiveProblem p = testing::golden();
  const StabilityMargins m = estimate_margins(p.dynamics(), approximate_front(p, 0.1));
  EXPECT_NEAR(m.max_spectral_radius, 0.3819660112501051, 1e-12);
  EXPECT_NEAR(m.rho_slack, 0.05 * (1 - 0.3819660112501051), 1e-12);
  EXPECT_DOUBLE_EQ(m.tau_bar, 1.0);
  EXPECT_TRUE(m.certified);
  EXPECT_EQ(m.sampled_weights, 1u);
}

GTEST_TEST(EstimateMargins, DuplicatedObjectivesMatchSingle) {
  const MultiObjectiveProblem one = testing::scalar_problem(0.9, 1, {{1, 3}});
  const MultiObjectiveProblem two = testing::scalar_problem(0.9, 1, {{1, 3}, {1, 3}});
  const StabilityMargins a = estimate_margins(one.dynamics(), approximate_front(one, 0.1));
  const StabilityMargins b = estimate_margins(two.dynamics(), approximate_front(two, 0.1));
  EXPECT_NEAR(a.gamma_bar, b.gamma_bar, 1e-14);
  EXPECT_NEAR(a.tau_bar, b.tau_bar, 1e-14);
}

GTEST_TEST(EstimateMargins, Sys2ScalarLoopsAreNormal) {
  const MultiObjectiveProblem p = testing::sys2();
  const StabilityMargins m = estimate_margins(p.dynamics(), approximate_front(p, 0.05));
  EXPECT_LT(m.gamma_bar, 1.0);
  EXPECT_DOUBLE_EQ(m.tau_bar, 1.0);
}

GTEST_TEST(EstimateMargins, SoundOnSampledNet) {
  std::mt19937_64 rng(52);
  const MultiObjectiveProblem p = testing::random_problem(3, 2, 2, rng);
  const ParetoFrontApprox f = approximate_front(p, 0.1);
  const StabilityMargins m = estimate_margins(p.dynamics(), f);
  for (const auto& e : f.points) {
    const Matrix L = p.dynamics().closed_loop(e->K);
    EXPECT_LE(spectral_radius(L), m.gamma_bar);
    EXPECT_LE(growth_rate_tau(L, m.gamma_bar).tau, m.tau_bar);
  }
}

GTEST_TEST(EstimateMargins, UnstablePoint) {
  const MultiObjectiveProblem p = testing::golden();
  ParetoFrontApprox f = approximate_front(p, 0.1);
  f.points[0]->K = scalar(0.0);
  EXPECT_EQ(code_of([&] { estimate_margins(p.dynamics(), f); }), ErrorCode::kUnstablePoint);
}

GTEST_TEST(GammaConstant, Examples) {
  const MultiObjectiveProblem zero = testing::sys0();
  const ParetoFrontApprox fz = approximate_front(zero, 0.1);
  const SensitivityConstants cz =
      gamma_constant(zero, estimate_margins(zero.dynamics(), fz), fz);
  EXPECT_NEAR(cz.gamma_cap, 2.0 + kSqrt2, 1e-13);
  EXPECT_DOUBLE_EQ(cz.r_bar, 2.0);

  const MultiObjectiveProblem golden = testing::golden();
  const ParetoFrontApprox fg = approximate_front(golden, 0.1);
  const SensitivityConstants cg =
      gamma_constant(golden, estimate_margins(golden.dynamics(), fg), fg);
  EXPECT_NEAR(cg.gamma_cap, 1.0 + (std::sqrt(13.0) + 3.0) / 2.0, 1e-13);
}

GTEST_TEST(GammaConstant, MonotoneInCostScale) {
  std::mt19937_64 rng(53);
  const MultiObjectiveProblem p = testing::random_problem(2, 1, 2, rng);
  std::vector<CostObjective> scaled;
  for (const auto& o : p.objectives()) scaled.push_back(CostObjective::make(10 * o.Q, o.R));
  const MultiObjectiveProblem q(p.dynamics(), scaled);
  const ParetoFrontApprox fp = approximate_front(p, 0.25);
  const ParetoFrontApprox fq = approximate_front(q, 0.25);
  EXPECT_GE(gamma_constant(q, estimate_margins(q.dynamics(), fq), fq).gamma_cap,
            gamma_constant(p, estimate_margins(p.dynamics(), fp), fp).gamma_cap);
}

GTEST_TEST(ContractionConstants, Examples) {
  const ContractionConstants c =
      contraction_constants(scalar(0), 0.5, scalar(1), scalar(0), scalar(1), scalar(1), 2.0);
  EXPECT_EQ(c.c1, 0.0);
  EXPECT_EQ(c.c3, 0.0);
  EXPECT_NEAR(c.c2, 8.0 / 0.75 * 1 * 4 * 4 * 4, 1e-12);
  EXPECT_NEAR(c.c2, 682.6666666666666, 1e-10);
  EXPECT_NEAR(c.c4, 44.0 / 0.75 * 8 * 1 * 32 * 8, 1e-9);
}

GTEST_TEST(ContractionConstants, C3IsThreeC1) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix L = gaussian_matrix(3, 3, rng);
    L *= 0.7 / spectral_radius(L);
    const Matrix S = testing::random_cost(3, rng);
    const ContractionConstants c = contraction_constants(
        L, 0.8, S, gaussian_matrix(3, 3, rng), gaussian_matrix(3, 2, rng), S, 3.0);
    EXPECT_DOUBLE_EQ(c.c3, 3.0 * c.c1);
  }
}

GTEST_TEST(ContractionConstants, Errors) {
  EXPECT_EQ(code_of([] {
              contraction_constants(scalar(0.9), 0.5, scalar(1), scalar(0), scalar(1), scalar(1), 2);
            }),
            ErrorCode::kDiverging);
  EXPECT_EQ(code_of([] {
              contraction_constants(scalar(0.5), 1.0, scalar(1), scalar(0), scalar(1), scalar(1), 2);
            }),
            ErrorCode::kBadInput);
}

GTEST_TEST(DarePerturbationBound, LinearInEpsilonAndFormula) {
  const MultiObjectiveProblem zero = testing::sys0();
  const ParetoFrontApprox f = approximate_front(zero, 0.1);
  const StabilityMargins m = estimate_margins(zero.dynamics(), f);
  const SensitivityConstants c = gamma_constant(zero, m, f);
  EXPECT_EQ(dare_perturbation_bound(c, m, 0.0).bound, 0.0);
  const double b1 = dare_perturbation_bound(c, m, 1e-3).bound;
  EXPECT_NEAR(dare_perturbation_bound(c, m, 2e-3).bound, 2 * b1, 1e-15);
  const double rho = m.gamma_bar;
  EXPECT_NEAR(b1, 1.0 / (1 - rho * rho) * 1 * 4 * 4 * 4 * 1e-3, 1e-15);
  EXPECT_NEAR(rho, 0.05, 1e-15);
}

GTEST_TEST(GainPerturbationBound, Examples) {
  SensitivityConstants c;
  c.gamma_cap = 1.0;
  EXPECT_EQ(gain_perturbation_bound(c, 0.0), 0.0);
  EXPECT_EQ(gain_perturbation_bound(c, 1.0), 7.0);
}

GTEST_TEST(GainPerturbationBound, DominatesAdjacentWeightsOnSys2) {
  const MultiObjectiveProblem p = testing::sys2();
  const ParetoFrontApprox f = approximate_front(p, 0.05);
  const SensitivityConstants c = gamma_constant(p, estimate_margins(p.dynamics(), f), f);
  for (std::size_t i = 1; i < f.points.size(); ++i) {
    const double dK = op_norm(f.points[i]->K - f.points[i - 1]->K);
    const double dP = op_norm(f.points[i]->dare.P - f.points[i - 1]->dare.P);
    EXPECT_LE(dK, gain_perturbation_bound(c, dP));
  }
}

GTEST_TEST(LoglogSlope, ExactPowerLaws) {
  const std::vector<double> x{1e-2, 1e-3, 1e-4};
  EXPECT_NEAR(loglog_slope(x, {3e-2, 3e-3, 3e-4}), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope(x, {1e-4, 1e-6, 1e-8}), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({1e-2}, {1.0})));
  EXPECT_TRUE(std::isnan(loglog_slope({0.0, 0.0}, {0.0, 0.0})));
}

GTEST_TEST(EmpiricalSensitivity, ZeroEpsilon) {
  const PerturbationReport r =
      empirical_dare_sensitivity(testing::golden(), WeightVector::uniform(1), {0.0}, {}, 1);
  ASSERT_EQ(r.empirical_dP.size(), 1u);
  EXPECT_EQ(r.empirical_dP[0], 0.0);
  EXPECT_TRUE(std::isnan(r.slope_loglog));
}

GTEST_TEST(EmpiricalSensitivity, GoldenQOnlySlope) {
  const PerturbationReport r = empirical_dare_sensitivity(
      testing::golden(), WeightVector::uniform(1), {1e-2, 1e-3, 1e-4},
      {.q = true, .r = false, .a = false, .b = false}, 2);
  EXPECT_GE(r.slope_loglog, 0.9);
  EXPECT_LE(r.slope_loglog, 1.1);
  // Scalar oracle: the perturbed DARE is the quadratic with q = 1 ± ε.
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    const double eps = r.epsilons[i];
    const double lo = std::abs(testing::scalar_dare(1, 1, 1 - eps, 1) - 1.618033988749895);
    const double hi = std::abs(testing::scalar_dare(1, 1, 1 + eps, 1) - 1.618033988749895);
    EXPECT_TRUE(std::abs(r.empirical_dP[i] - lo) < 1e-10 || std::abs(r.empirical_dP[i] - hi) < 1e-10);
  }
}

GTEST_TEST(EmpiricalSensitivity, BoundHoldsInsideValidityWithLargeConstant) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const MultiObjectiveProblem p = testing::random_problem(3, 2, 2, rng, 0.5, 0.9);
    const PerturbationReport r = empirical_dare_sensitivity(
        p, WeightVector::uniform(2), {1e-2, 1e-3, 1e-4, 1e-6, 1e-8}, {}, trial, 100.0);
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
      if (!r.inside_validity[i] || r.skipped[i]) continue;
      EXPECT_LE(r.empirical_dP[i], r.theoretical_bound[i]);
    }
    EXPECT_GE(r.slope_loglog, 0.8);
    EXPECT_LE(r.slope_loglog, 1.2);
  }
}

GTEST_TEST(EmpiricalSensitivity, GainInheritsStability) {
  std::mt19937_64 rng(56);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // d = n keeps B(ΣR)⁻¹Bᵀ nonsingular, so Γ is finite.
    const MultiObjectiveProblem p = testing::random_problem(3, 3, 1, rng, 0.5, 0.9);
    const ParetoFrontApprox f = approximate_front(p, 1.0);
    const SensitivityConstants c = gamma_constant(p, estimate_margins(p.dynamics(), f), f);
    const ParetoPoint& pt = *f.points[0];
    const auto& dyn = p.dynamics();
    const Matrix L = dyn.closed_loop(pt.K);
    const double gamma = spectral_radius(L) + 0.5 * (1 - spectral_radius(L));
    const double tau = growth_rate_tau(L, gamma).tau;
    for (double eps : {1e-6, 1e-9, 1e-12}) {
      const Matrix Q = p.objectives()[0].Q + eps * unit_direction(3, 3, true, rng);
      const OptimalGain g = optimal_gain(dyn, Q, p.objectives()[0].R);
      const double dP = op_norm(g.dare.P - pt.dare.P);
      if (gain_perturbation_bound(c, dP) > (1 - gamma) / (2 * tau * op_norm(dyn.B()))) continue;
      ++checked;
      EXPECT_LE(growth_rate_tau(dyn.closed_loop(g.K), (1 + gamma) / 2).tau, tau * (1 + 1e-12));
    }
  }
  EXPECT_GT(checked, 0);
}

}  // namespace
}  // namespace molqr
