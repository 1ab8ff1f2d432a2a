#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qarrival/errors.hpp"
#include "qarrival/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Arrival-time densities from the restricted Hamiltonian on a 1D grid"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  bool record_states = false;
  std::string parameter;
  std::vector<double> values;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file (defaults apply when omitted)");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
  };

  CLI::App* verify = app.add_subcommand("verify", "operator identity checks and dense oracles");
  common(verify);
  CLI::App* simulate = app.add_subcommand("simulate", "unitary run, arrival record and restricted diagnostic");
  common(simulate);
  simulate->add_flag("--record-states", record_states, "write every recorded state under states/");
  CLI::App* sweep = app.add_subcommand("sweep", "one simulation per parameter value");
  common(sweep);
  sweep->add_flag("--record-states", record_states, "write every recorded state under states/");
  sweep->add_option("--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_option("--param", parameter, "k0, sigma, x_d, dt or dx")->required();
  sweep->add_option("--values", values, "parameter values")->expected(0, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qarrival::kExitValidation;
  }

  qarrival::SimulationConfig config;
  try {
    if (!config_path.empty()) config = qarrival::load_config(config_path);
  } catch (const qarrival::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qarrival::kExitValidation;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;

  if (*verify) return qarrival::cmd_verify(config, config.output_dir, std::cout);
  if (*simulate) return qarrival::cmd_simulate(config, config.output_dir, record_states, std::cout);
  return qarrival::cmd_sweep(config, {parameter, values}, config.output_dir, workers, record_states, std::cout);
}
