#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "molqr/cli.hpp"

int main(int argc, char** argv) {
  using molqr::cli::Command;
  using molqr::cli::Format;

  CLI::App app{"Multi-objective LQR: Pareto fronts by linear scalarization"};
  app.require_subcommand(1);

  molqr::cli::RunConfig config;
  double epsilon = 0.0;
  double dyn_epsilon = 0.0;
  std::vector<double> weight;
  const std::map<std::string, Format> formats{{"csv", Format::kCsv}, {"json", Format::kJson}};

  struct Sub {
    const char* name;
    const char* help;
    Command command;
    bool needs_problem;
  };
  const Sub subs[] = {
      {"solve", "Solve one scalarization (default: uniform weight)", Command::kSolve, true},
      {"front", "Approximate the Pareto front over an epsilon-net", Command::kFront, true},
      {"sensitivity", "Stability margins, constants and DARE perturbation study",
       Command::kSensitivity, true},
      {"ce", "Certainty-equivalence front audited on the true dynamics", Command::kCe, true},
      {"demo-pendulum", "Inverted-pendulum front with losses normalized to [0,1]",
       Command::kDemoPendulum, false},
      {"verify", "Lifting, cost-difference and brute-force sufficiency checks", Command::kVerify,
       true},
  };

  std::vector<std::pair<CLI::App*, Command>> registered;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    if (s.needs_problem) {
      sub->add_option("problem", config.problem_path, "Problem JSON file")
          ->required()
          ->check(CLI::ExistingFile);
    } else {
      sub->add_option("--write-problem", config.problem_out, "Also write the problem JSON here");
    }
    sub->add_option("--epsilon", epsilon, "Net resolution epsilon in (0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", config.seed, "Random seed");
    sub->add_option("--workers", config.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", config.output_path, "Output path (default: stdout)");
    sub->add_option("--format", config.format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    if (s.command == Command::kSolve || s.command == Command::kSensitivity) {
      sub->add_option("--weight", weight, "Scalarization weights w1,...,wm")->delimiter(',');
    }
    if (s.command == Command::kCe) {
      auto* dyn = sub->add_option("--dyn-epsilon", dyn_epsilon, "Norm of the dynamics perturbation");
      auto* ident = sub->add_flag("--identify", config.identify,
                                  "Estimate dynamics by least squares on simulated rollouts");
      dyn->excludes(ident);
      sub->add_option("--noise-std", config.noise_std, "Process noise std (identification)");
      sub->add_option("--horizon", config.horizon, "Rollout length (identification)");
      sub->add_option("--rollouts", config.rollouts, "Number of rollouts (identification)");
    }
    registered.emplace_back(sub, s.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : molqr::cli::kExitParse;
  }

  for (const auto& [sub, command] : registered) {
    if (!sub->parsed()) continue;
    config.command = command;
    if (sub->count("--epsilon") > 0) {
      if (!(epsilon > 0.0)) {
        std::cerr << "error: --epsilon must be positive\n";
        return molqr::cli::kExitParse;
      }
      config.epsilon = epsilon;
    }
    if (!weight.empty()) config.weight = weight;
    if (command == Command::kCe && sub->count("--dyn-epsilon") > 0) config.dyn_epsilon = dyn_epsilon;
  }
  return molqr::cli::run(config, std::cout, std::cerr);
}
