#include <iostream>

#include "CLI11.hpp"

#include "gridroute/cli_runner.hpp"

int main(int argc, char** argv) {
  namespace cli = gridroute::cli;
  cli::configure_logging();

  CLI::App app{"gridroute: line-switching power router simulator"};
  app.require_subcommand(1);

  cli::SimulateOptions sim;
  int steps = -1;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "run a scenario and write flows, plans, ledger and summary");
  simulate->add_option("--scenario", sim.scenario, "scenario JSON file or built-in name (modeAB)")->required();
  auto* steps_opt = simulate->add_option("--steps", steps, "number of steps (default from scenario)")
                        ->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", sim.out_dir, "output directory")->capture_default_str();
  auto* seed_opt = simulate->add_option("--seed", seed, "override scenario seed");

  cli::ExperimentOptions exp;
  auto* replicate = app.add_subcommand("replicate-experiment", "three-house waveform experiment");
  replicate->add_option("--mode", exp.mode, "A, B or AB")->check(CLI::IsMember({"A", "B", "AB"}))->capture_default_str();
  replicate->add_option("--out", exp.out_dir, "output directory")->capture_default_str();
  replicate->add_option("--noise", exp.current_noise_a, "gaussian current noise, A rms")
      ->check(CLI::NonNegativeNumber);
  replicate->add_option("--seed", exp.seed, "noise seed");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a scenario without running it");
  validate->add_option("--scenario", validate_path, "scenario JSON file")->required();

  std::string replay_dir;
  auto* replay = app.add_subcommand("replay", "re-derive the ledger of a simulate output directory");
  replay->add_option("--dir", replay_dir, "simulate output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kExitInvalid;
  }

  try {
    if (*simulate) {
      if (*steps_opt) sim.steps = steps;
      if (*seed_opt) sim.seed = seed;
      return cli::cmd_simulate(sim, std::cout, std::cerr);
    }
    if (*replicate) return cli::cmd_replicate_experiment(exp, std::cout, std::cerr);
    if (*validate) return cli::cmd_validate(validate_path, std::cout, std::cerr);
    if (*replay) return cli::cmd_replay(replay_dir, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"internal\",\"message\":\"" << e.what() << "\"}\n";
    return cli::kExitViolations;
  }
  return cli::kExitInvalid;
}
