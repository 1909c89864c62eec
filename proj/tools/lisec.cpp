#include <CLI11.hpp>
#include <iostream>

#include "lisec/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LIS-assisted secrecy-rate optimization simulator"};
  app.require_subcommand(1);

  std::string run_path;
  CLI::App* cmd_run = app.add_subcommand("run", "execute an experiment and write its CSV");
  cmd_run->add_option("config", run_path, "experiment config file")->required();

  std::string validate_path;
  CLI::App* cmd_validate = app.add_subcommand("validate", "parse a config file and exit");
  cmd_validate->add_option("config", validate_path, "experiment config file")->required();

  CLI::App* cmd_selftest = app.add_subcommand("selftest", "run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const lisec::ExperimentConfig cfg = lisec::load_config(run_path);
      const auto rows = lisec::run_experiment(cfg);
      std::cout << rows.size() << " rows written to " << cfg.output_path << "\n";
    } else if (cmd_validate->parsed()) {
      const lisec::ExperimentConfig cfg = lisec::load_config(validate_path);
      std::cout << "config ok: experiment " << lisec::experiment_name(cfg.experiment_id)
                << ", objective " << lisec::objective_name(cfg.objective) << ", trials "
                << cfg.trials << "\n";
    } else if (cmd_selftest->parsed()) {
      if (!lisec::selftest(std::cout)) return 2;
    }
  } catch (const lisec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
