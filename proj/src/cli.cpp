#include "molqr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "molqr/io.hpp"

namespace molqr::cli {
namespace {

using io::Json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kBadInput:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kInvalidWeight:
    case ErrorCode::kNotStabilizable:
    case ErrorCode::kTooFine:
      return kExitParse;
    default:
      return kExitSolver;
  }
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.output_path.empty()) {
    out << text;
  } else {
    io::write_text(config.output_path, text);
  }
}

FrontOptions front_options(const RunConfig& config) {
  FrontOptions opts;
  opts.workers = std::max(1, config.workers);
  return opts;
}

WeightVector weight_from_config(const RunConfig& config, std::size_t m) {
  if (!config.weight) return WeightVector::uniform(m);
  if (config.weight->size() != m) {
    throw Error(ErrorCode::kInvalidWeight, "--weight needs " + std::to_string(m) + " entries");
  }
  return WeightVector(Eigen::Map<const Vector>(config.weight->data(),
                                               static_cast<Eigen::Index>(m)));
}

void warn_partial(const ParetoFrontApprox& front, std::ostream& err) {
  if (front.complete()) return;
  err << "warning: " << front.failures.size() << " of " << front.net.points.size()
      << " weights failed; front is incomplete\n";
  for (const auto& f : front.failures) err << "  weight " << f.index << ": " << f.message << '\n';
}

Json header(const char* command) { return {{"schema", io::kSchemaVersion}, {"command", command}}; }

}  // namespace

MultiObjectiveProblem pendulum_problem() {
  constexpr double g = 9.81;
  constexpr double length = 1.0;
  constexpr double mass = 1.0;
  constexpr double dt = 0.05;
  Matrix Ac(2, 2);
  Ac << 0.0, 1.0, g / length, 0.0;
  Matrix Bc(2, 1);
  Bc << 0.0, 1.0 / (mass * length * length);
  Matrix A = Matrix::Identity(2, 2) + dt * Ac;
  Matrix B = dt * Bc;

  Matrix Q1(2, 2);
  Q1 << 100.0, 0.0, 0.0, 1.0;
  std::vector<CostObjective> objectives;
  objectives.push_back(
      CostObjective::make(Q1, Matrix::Identity(1, 1), "distance to upright", true));
  objectives.push_back(CostObjective::make(Matrix::Identity(2, 2), 100.0 * Matrix::Identity(1, 1),
                                           "cumulative acceleration", true));
  return MultiObjectiveProblem(DynamicsModel(std::move(A), std::move(B)), std::move(objectives));
}

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& /*err*/) {
  const MultiObjectiveProblem problem = io::load_problem(config.problem_path);
  const WeightVector w = weight_from_config(config, problem.m());
  const ParetoPoint point = solve_scalarized(problem, w);
  if (config.format == Format::kCsv) {
    ParetoFrontApprox single;
    single.net.m = problem.m();
    single.net.points = {w};
    single.points = {point};
    emit(config, io::front_to_csv(single), out);
  } else {
    Json doc = header("solve");
    doc["problem_digest"] = problem_digest(problem);
    doc["result"] = io::point_to_json(point);
    emit(config, io::dump(doc), out);
  }
  return kExitOk;
}

int cmd_front(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const MultiObjectiveProblem problem = io::load_problem(config.problem_path);
  const double epsilon = config.epsilon.value_or(0.1);
  const ParetoFrontApprox front = approximate_front(problem, epsilon, front_options(config));
  warn_partial(front, err);
  if (config.format == Format::kCsv) {
    emit(config, io::front_to_csv(front), out);
  } else {
    Json doc = header("front");
    doc.update(io::front_to_json(front));
    emit(config, io::dump(doc), out);
  }
  (config.output_path.empty() ? err : out) << "points: " << front.net.points.size() << '\n';
  return kExitOk;
}

int cmd_sensitivity(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const MultiObjectiveProblem problem = io::load_problem(config.problem_path);
  const double epsilon = config.epsilon.value_or(0.1);
  const ParetoFrontApprox front = approximate_front(problem, epsilon, front_options(config));
  warn_partial(front, err);
  const StabilityMargins margins = estimate_margins(problem.dynamics(), front);
  const std::size_t reference =
      nearest_net_point(front.net, weight_from_config(config, problem.m())).index;
  const SensitivityConstants constants = gamma_constant(problem, margins, front, reference);
  PerturbationReport report =
      empirical_dare_sensitivity(problem, front.net.points[reference], {1e-2, 1e-3, 1e-4},
                                 PerturbationDirections{}, config.seed);

  Json doc = header("sensitivity");
  doc["problem_digest"] = front.problem_digest;
  doc["net_epsilon"] = epsilon;
  doc.update(io::sensitivity_report_to_json(report));
  // Margins and constants over the whole net rather than the single weight.
  doc["margins"] = io::margins_to_json(margins);
  doc["constants"] = io::constants_to_json(constants);
  doc["seed"] = config.seed;
  emit(config, io::dump(doc), out);
  return kExitOk;
}

int cmd_ce(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const MultiObjectiveProblem problem = io::load_problem(config.problem_path);
  const double epsilon = config.epsilon.value_or(0.1);
  EstimatedDynamics estimates;
  if (config.identify) {
    IdentificationOptions opts;
    opts.noise_std = config.noise_std;
    opts.horizon = config.horizon;
    opts.rollouts = config.rollouts;
    opts.seed = config.seed;
    estimates = identify_dynamics(problem.dynamics(), opts);
  } else {
    if (!config.dyn_epsilon) {
      throw Error(ErrorCode::kBadInput, "ce needs --dyn-epsilon or --identify");
    }
    estimates = perturb_dynamics(problem.dynamics(), *config.dyn_epsilon, config.seed);
  }
  const ParetoFrontApprox truth = approximate_front(problem, epsilon, front_options(config));
  warn_partial(truth, err);
  const CEFront ce = ce_front(problem, estimates, epsilon, front_options(config));
  warn_partial(ce.base, err);
  const CEReport report = ce_error_report(problem, truth, ce);

  Json doc = header("ce");
  doc["problem_digest"] = truth.problem_digest;
  doc["net_epsilon"] = epsilon;
  doc["seed"] = config.seed;
  doc["err_A"] = estimates.err_A;
  doc["err_B"] = estimates.err_B;
  doc.update(io::ce_report_to_json(report));
  emit(config, io::dump(doc), out);
  return kExitOk;
}

int cmd_demo_pendulum(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const MultiObjectiveProblem problem = pendulum_problem();
  if (!config.problem_out.empty()) {
    io::write_text(config.problem_out, io::dump(io::problem_to_json(problem)));
  }
  const double epsilon = config.epsilon.value_or(kPendulumEpsilon);
  const ParetoFrontApprox front = approximate_front(problem, epsilon, front_options(config));
  warn_partial(front, err);

  const Eigen::Index m = static_cast<Eigen::Index>(problem.m());
  Vector lo = Vector::Constant(m, std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  for (const auto& e : front.points) {
    if (!e) continue;
    lo = lo.cwiseMin(e->losses);
    hi = hi.cwiseMax(e->losses);
  }
  auto normalized = [&](const Vector& losses) {
    Vector out_v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double range = hi(i) - lo(i);
      out_v(i) = range > 0.0 ? std::clamp((losses(i) - lo(i)) / range, 0.0, 1.0) : 0.0;
    }
    return out_v;
  };

  if (config.format == Format::kCsv) {
    std::string text = "w_1,w_2,loss_1,loss_2,raw_loss_1,raw_loss_2\n";
    for (const auto& e : front.points) {
      if (!e) continue;
      const Vector nl = normalized(e->losses);
      text += io::format_double(e->w[0]) + ',' + io::format_double(e->w[1]) + ',' +
              io::format_double(nl(0)) + ',' + io::format_double(nl(1)) + ',' +
              io::format_double(e->losses(0)) + ',' + io::format_double(e->losses(1)) + '\n';
    }
    emit(config, text, out);
  } else {
    Json doc = header("demo-pendulum");
    doc["label"] = "canonical linearization";
    doc["epsilon"] = epsilon;
    doc["problem_digest"] = front.problem_digest;
    doc["objectives"] = {problem.objectives()[0].label, problem.objectives()[1].label};
    doc["normalization"] = {{"min", {lo(0), lo(1)}}, {"max", {hi(0), hi(1)}}};
    Json points = Json::array();
    for (const auto& e : front.points) {
      if (!e) continue;
      const Vector nl = normalized(e->losses);
      points.push_back({{"w", {e->w[0], e->w[1]}},
                        {"loss", {nl(0), nl(1)}},
                        {"raw_loss", {e->losses(0), e->losses(1)}}});
    }
    doc["points"] = std::move(points);
    emit(config, io::dump(doc), out);
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& /*err*/) {
  const MultiObjectiveProblem problem = io::load_problem(config.problem_path);
  const auto& dyn = problem.dynamics();
  bool all_ok = true;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    all_ok = all_ok && ok;
  };

  const ParetoFrontApprox front = approximate_front(problem, 0.05, front_options(config));
  report("front", front.complete(),
         std::to_string(front.net.points.size() - front.failures.size()) + "/" +
             std::to_string(front.net.points.size()) + " weights solved");

  double worst_eig = std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  bool lifting_ok = true;
  for (const auto& e : front.points) {
    if (!e) continue;
    const LiftingCertificate cert = verify_lifting(dyn, e->K, problem.objectives());
    worst_eig = std::min(worst_eig, cert.min_eig_schur);
    worst_gap = std::max(worst_gap,
                         cert.objective_gap.cwiseAbs().cwiseQuotient(
                             (cert.losses.array() + 1.0).matrix()).maxCoeff());
    lifting_ok = lifting_ok && cert.feasible;
  }
  report("lifting", lifting_ok,
         "min_eig_schur=" + io::format_double(worst_eig) +
             " max_rel_gap=" + io::format_double(worst_gap));

  double worst_identity = 0.0;
  for (std::size_t i = 0; i + 1 < front.points.size(); ++i) {
    if (!front.points[i] || !front.points[i + 1]) continue;
    const Matrix& K = front.points[i]->K;
    const Matrix& Kp = front.points[i + 1]->K;
    for (const auto& obj : problem.objectives()) {
      const double direct = cost_via_value(dyn, Kp, obj.Q, obj.R) - cost_via_value(dyn, K, obj.Q, obj.R);
      const double expansion = cost_difference_exact(dyn, K, Kp, obj.Q, obj.R);
      const double scale = std::max(1.0, cost_via_value(dyn, K, obj.Q, obj.R));
      worst_identity = std::max(worst_identity, std::abs(direct - expansion) / scale);
    }
  }
  report("cost-difference", worst_identity <= 1e-8,
         "max_rel_residual=" + io::format_double(worst_identity));

  if (dyn.n() == 1 && dyn.d() == 1) {
    const double epsilon = config.epsilon.value_or(0.01);
    const auto brute = brute_force_front(problem, scalar_gain_grid(dyn, 0.002));
    const ParetoFrontApprox fine = approximate_front(problem, epsilon, front_options(config));
    const double gap = normalized_coverage_gap(brute, fine);
    report("sufficiency", gap <= 0.05,
           "normalized_gap=" + io::format_double(gap) + " brute_points=" +
               std::to_string(brute.size()));
  } else {
    out << "SKIP sufficiency: brute-force arm needs n = d = 1\n";
  }
  return all_ok ? kExitOk : kExitCheckFailed;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::kSolve: return cmd_solve(config, out, err);
      case Command::kFront: return cmd_front(config, out, err);
      case Command::kSensitivity: return cmd_sensitivity(config, out, err);
      case Command::kCe: return cmd_ce(config, out, err);
      case Command::kDemoPendulum: return cmd_demo_pendulum(config, out, err);
      case Command::kVerify: return cmd_verify(config, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitSolver;
}

}  // namespace molqr::cli
