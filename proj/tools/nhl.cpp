// Command-line driver: nhl run|sweep|validate <config.json>

#include <iostream>

#include <CLI11.hpp>

#include "nhl/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Loss-patterned lattice simulator"};
  app.require_subcommand(1);
  std::string run_cfg, sweep_cfg, val_cfg;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", run_cfg, "experiment config (JSON)")->required();
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep (NHL_WORKERS sets the worker count)");
  sweep->add_option("config", sweep_cfg, "sweep config (JSON)")->required();
  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", val_cfg, "experiment config (JSON)")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : nhl::kConfigInvalid;
  }
  if (*run) return nhl::run_experiment(run_cfg, std::cerr);
  if (*sweep) return nhl::run_sweep(sweep_cfg, std::cerr);
  return nhl::validate_config(val_cfg, std::cerr);
}
