#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qarrival/config.hpp"

namespace qarrival {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitInvariant = 3, kExitNumerical = 4 };

struct CheckResult {
  std::string name;
  Real value = 0.0;
  Real threshold = 0.0;
  // "<=", ">" or "report" (not asserted)
  std::string relation;
  bool passed = true;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  // Name of the first asserted check that failed, empty when all passed.
  std::string first_failure() const;
  void write(std::ostream& out) const;
};

// Operator identities on the configured grid plus dense-oracle checks on a 64-point grid.
VerifyReport run_verification(const SimulationConfig& config);

struct SimulationSummary {
  Real peak_arrival_time = 0.0;
  Real total_arrival_probability = 0.0;
  Real final_survival = 0.0;
  Real max_continuity_residual = 0.0;
  Real max_route_difference = 0.0;
  Real max_norm_drift = 0.0;
  Real hazard_max_relative_deviation = 0.0;
  Real restricted_direct_final_norm = 0.0;
  Real restricted_decomposed_final_norm = 0.0;
  Real restricted_direct_max_difference = 0.0;
  Real restricted_decomposed_max_difference = 0.0;
  bool restricted_direct_rates_agree = false;
  bool restricted_decomposed_rates_agree = false;
  std::vector<std::string> warnings;
};

// Runs the full pipeline and writes config.echo, trajectory.csv, arrival.csv
// and summary.csv (plus states/ when requested) into `out_dir`.
SimulationSummary run_simulation(const SimulationConfig& config, const std::filesystem::path& out_dir,
                                 bool record_states = false);

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SimulationSummary& summary);

struct SweepSpec {
  std::string parameter;  // k0, sigma, x_d, dt or dx
  std::vector<Real> values;
};

SimulationConfig apply_sweep_value(const SimulationConfig& config, const std::string& parameter, Real value);

// CLI entry points; each returns a process exit code and reports to `log`.
int cmd_verify(const SimulationConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_simulate(const SimulationConfig& config, const std::filesystem::path& out_dir, bool record_states,
                 std::ostream& log);
int cmd_sweep(const SimulationConfig& config, const SweepSpec& sweep, const std::filesystem::path& out_dir,
              unsigned workers, bool record_states, std::ostream& log);

}  // namespace qarrival
