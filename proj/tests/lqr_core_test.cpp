#include "molqr/lqr_core.hpp"

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

GTEST_TEST(DynamicsModel, RejectsInvalidPairs) {
  Matrix A(2, 2);
  A << 1.5, 0, 0, 0.5;
  Matrix B(2, 1);
  B << 0, 1;
  EXPECT_EQ(code_of([&] { DynamicsModel(A, B); }), ErrorCode::kNotStabilizable);
  EXPECT_EQ(code_of([] { DynamicsModel(Matrix::Identity(2, 2), Matrix::Identity(3, 1)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { DynamicsModel(scalar(NAN), scalar(1)); }), ErrorCode::kBadInput);
}

GTEST_TEST(CostObjective, NormalizationAndValidation) {
  EXPECT_EQ(code_of([] { CostObjective::make(scalar(0.5), scalar(1)); }), ErrorCode::kBadInput);
  const CostObjective c = CostObjective::make(scalar(0.5), scalar(2), "effort", true);
  EXPECT_DOUBLE_EQ(c.Q(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.R(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(c.scale, 2.0);
  EXPECT_NE(c.label.find("effort"), std::string::npos);
  Matrix Q(2, 2);
  Q << 1, 2, 0, 1;
  EXPECT_EQ(code_of([&] { CostObjective::make(Q, scalar(1)); }), ErrorCode::kBadInput);
}

GTEST_TEST(OptimalGain, ScalarExamples) {
  const DynamicsModel zero(scalar(0), scalar(1));
  const OptimalGain g0 = optimal_gain(zero, scalar(1), scalar(1));
  EXPECT_NEAR(g0.K(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(g0.dare.P(0, 0), 1.0, 1e-14);

  const DynamicsModel one(scalar(1), scalar(1));
  const OptimalGain g1 = optimal_gain(one, scalar(1), scalar(1));
  EXPECT_NEAR(g1.K(0, 0), -0.6180339887498949, 1e-12);
  EXPECT_NEAR(g1.K(0, 0), testing::scalar_gain(1, 1, 1, 1), 1e-12);

  const DynamicsModel sys(scalar(0.9), scalar(1));
  const OptimalGain g2 = optimal_gain(sys, scalar(1), scalar(10));
  EXPECT_GT(g2.K(0, 0), -0.9);
  EXPECT_LT(g2.K(0, 0), 0.0);
  EXPECT_NEAR(g2.K(0, 0), -0.19379280563743198, 1e-11);
  EXPECT_LT(std::abs(0.9 + g2.K(0, 0)), 1.0);
}

GTEST_TEST(CostRepresentations, ScalarExamples) {
  const DynamicsModel half(scalar(0.5), scalar(1));
  const DynamicsModel zero(scalar(0), scalar(1));
  const DynamicsModel one(scalar(1), scalar(1));
  const double k_star = testing::scalar_gain(1, 1, 1, 1);
  for (auto cost : {&cost_via_value, &cost_via_gramian}) {
    EXPECT_NEAR(cost(half, scalar(0), scalar(1), scalar(1)), 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(cost(zero, scalar(0), scalar(1), scalar(1)), 1.0, 1e-15);
    EXPECT_NEAR(cost(one, scalar(k_star), scalar(1), scalar(1)), 1.618033988749895, 1e-12);
  }
}

GTEST_TEST(CostRepresentations, ScalarClosedFormOnGainSweep) {
  for (double k = -1.8; k <= -0.05; k += 0.05) {
    const DynamicsModel dyn(scalar(0.9), scalar(1));
    const double expected = testing::scalar_cost(0.9, 1, 1, 10, k);
    EXPECT_NEAR(cost_via_value(dyn, scalar(k), scalar(1), scalar(10)), expected, 1e-10 * expected);
    EXPECT_NEAR(cost_via_gramian(dyn, scalar(k), scalar(1), scalar(10)), expected,
                1e-10 * expected);
  }
}

GTEST_TEST(CostRepresentations, AgreeOnRandomStabilizingGains) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const DynamicsModel dyn = testing::random_dynamics(3 + trial % 3, 2, rng);
    const Matrix Q = testing::random_cost(dyn.n(), rng);
    const Matrix R = testing::random_cost(dyn.d(), rng);
    const Matrix K = testing::random_stabilizing_gain(dyn, rng);
    const double v = cost_via_value(dyn, K, Q, R);
    EXPECT_NEAR(cost_via_gramian(dyn, K, Q, R), v, 1e-8 * v);
  }
}

GTEST_TEST(CostRepresentations, OptimumEqualsTraceP) {
  std::mt19937_64 rng(22);
  const DynamicsModel dyn = testing::random_dynamics(4, 2, rng);
  const Matrix Q = testing::random_cost(4, rng);
  const Matrix R = testing::random_cost(2, rng);
  const OptimalGain opt = optimal_gain(dyn, Q, R);
  const double trace = opt.dare.P.trace();
  EXPECT_NEAR(cost_via_value(dyn, opt.K, Q, R), trace, 1e-8 * trace);
  EXPECT_NEAR(cost_via_gramian(dyn, opt.K, Q, R), trace, 1e-8 * trace);
}

GTEST_TEST(CostRepresentations, UnstableGainThrows) {
  const DynamicsModel one(scalar(1), scalar(1));
  EXPECT_EQ(code_of([&] { cost_via_value(one, scalar(0), scalar(1), scalar(1)); }),
            ErrorCode::kUnstable);
  EXPECT_EQ(code_of([&] { cost_via_gramian(one, scalar(0.5), scalar(1), scalar(1)); }),
            ErrorCode::kUnstable);
}

GTEST_TEST(OptimalGain, NoStabilizingPerturbationImproves) {
  std::mt19937_64 rng(23);
  const DynamicsModel dyn = testing::random_dynamics(3, 2, rng);
  const Matrix Q = testing::random_cost(3, rng);
  const Matrix R = testing::random_cost(2, rng);
  const OptimalGain opt = optimal_gain(dyn, Q, R);
  const double best = cost_via_value(dyn, opt.K, Q, R);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix K = opt.K + 1e-2 * unit_direction(2, 3, false, rng);
    if (!is_stabilizing(dyn.A(), dyn.B(), K)) continue;
    EXPECT_GE(cost_via_value(dyn, K, Q, R), best - 1e-10 * best);
  }
}

GTEST_TEST(CostVector, Sys2Example) {
  const MultiObjectiveProblem p = testing::sys2();
  const Vector l = cost_vector(p, scalar(-0.5));
  ASSERT_EQ(l.size(), 2);
  EXPECT_GT(l(0), 0.0);
  EXPECT_GT(l(1), l(0));
  EXPECT_NEAR(l(0), testing::scalar_cost(0.9, 1, 1, 1, -0.5), 1e-12);
  EXPECT_NEAR(l(1), testing::scalar_cost(0.9, 1, 1, 10, -0.5), 1e-11);
}

GTEST_TEST(CostVector, DuplicatedObjectivesGiveIdenticalEntries) {
  const MultiObjectiveProblem p = testing::scalar_problem(0.9, 1.0, {{2, 3}, {2, 3}, {2, 3}});
  const Vector l = cost_vector(p, scalar(-0.4));
  EXPECT_EQ(l(0), l(1));
  EXPECT_EQ(l(1), l(2));
}

GTEST_TEST(CostDifference, Examples) {
  const DynamicsModel half(scalar(0.5), scalar(1));
  EXPECT_NEAR(cost_difference_exact(half, scalar(-0.2), scalar(-0.2), scalar(1), scalar(1)), 0.0,
              1e-15);
  const double expected = cost_via_value(half, scalar(-0.1), scalar(1), scalar(1)) -
                          cost_via_value(half, scalar(0), scalar(1), scalar(1));
  EXPECT_NEAR(cost_difference_exact(half, scalar(0), scalar(-0.1), scalar(1), scalar(1)), expected,
              1e-10);
}

GTEST_TEST(CostDifference, IdentityOnRandomPairs) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    const DynamicsModel dyn = testing::random_dynamics(3, 2, rng);
    const Matrix Q = testing::random_cost(3, rng);
    const Matrix R = testing::random_cost(2, rng);
    const Matrix K = testing::random_stabilizing_gain(dyn, rng);
    const Matrix K2 = testing::random_stabilizing_gain(dyn, rng);
    const double lhs = cost_via_value(dyn, K2, Q, R) - cost_via_value(dyn, K, Q, R);
    const double rhs = cost_difference_exact(dyn, K, K2, Q, R);
    const double scale = std::max(cost_via_value(dyn, K2, Q, R), cost_via_value(dyn, K, Q, R));
    EXPECT_NEAR(lhs, rhs, 1e-8 * scale);
  }
}

GTEST_TEST(SimulateCost, CumulativeMatchesGeometricSeries) {
  const DynamicsModel half(scalar(0.5), scalar(1));
  const CostEstimate e = simulate_cost(half, scalar(0), scalar(1), scalar(1), 200, 20000, 1);
  EXPECT_NEAR(e.estimate, 4.0 / 3.0, 4.0 * e.std_error);
  EXPECT_GT(e.std_error, 0.0);
}

GTEST_TEST(SimulateCost, TimeAveragedTransientVanishes) {
  const DynamicsModel zero(scalar(0), scalar(1));
  const CostEstimate a =
      simulate_cost(zero, scalar(0), scalar(1), scalar(1), 10000, 100, 2,
                    SimulationMode::kTimeAveraged);
  EXPECT_LT(a.estimate, 1e-3);
  const DynamicsModel half(scalar(0.5), scalar(1));
  const CostEstimate b =
      simulate_cost(half, scalar(0), scalar(1), scalar(1), 10000, 1000, 3,
                    SimulationMode::kTimeAveraged);
  // Mean is (4/3)(1 − 0.25^T)/T.
  EXPECT_NEAR(b.estimate, (4.0 / 3.0) / 10000.0, 4.0 * b.std_error);
  EXPECT_LT(b.estimate, 1e-3);
}

GTEST_TEST(SimulateCost, Deterministic) {
  const DynamicsModel half(scalar(0.5), scalar(1));
  const CostEstimate a = simulate_cost(half, scalar(-0.1), scalar(1), scalar(1), 50, 100, 9);
  const CostEstimate b = simulate_cost(half, scalar(-0.1), scalar(1), scalar(1), 50, 100, 9);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}

}  // namespace
}  // namespace molqr
