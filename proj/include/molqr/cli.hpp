#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "molqr/lqr_core.hpp"

namespace molqr::cli {

enum class Command { kSolve, kFront, kSensitivity, kCe, kDemoPendulum, kVerify };
enum class Format { kCsv, kJson };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitSolver = 3;

struct RunConfig {
  Command command = Command::kSolve;
  std::string problem_path;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_path;  // empty: standard output
  Format format = Format::kJson;
  std::optional<std::vector<double>> weight;
  std::optional<double> dyn_epsilon;
  bool identify = false;
  double noise_std = 1e-3;
  int horizon = 50;
  int rollouts = 20;
  std::string problem_out;  // demo-pendulum: also write the problem file here
};

/// Linearized inverted pendulum (g = 9.81, ℓ = 1, mass 1) discretized with
/// forward Euler at Δt = 0.05. Objective 1 penalizes angle deviation
/// (Q = diag(100, 1), R = 1), objective 2 control effort (Q = I, R = 100).
MultiObjectiveProblem pendulum_problem();

inline constexpr double kPendulumEpsilon = 0.031622776601683791;  // 10^-1.5

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_front(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sensitivity(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ce(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_demo_pendulum(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace molqr::cli
