#include "qarrival/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "qarrival/csv.hpp"
#include "qarrival/errors.hpp"
#include "qarrival/observables.hpp"

namespace qarrival {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = csv::open(path.string());
  out << text;
}

std::string format_index(std::size_t i, std::size_t count) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  return std::string(width - digits.size(), '0') + digits;
}

// Runs `body` and converts the exception taxonomy into exit codes.
template <typename Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const EdgeContamination& e) {
    log << "numerical abort (edge contamination): " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    log << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace

SimulationSummary run_simulation(const SimulationConfig& config, const fs::path& out_dir, bool record_states) {
  validate_config(config);
  const Grid1D grid = build_grid(config);
  const Region region = build_region(config);
  const Potential potential = build_potential(config);
  const WaveFunction psi0 = build_packet(config);
  const Real m = config.mass;

  PropagatorConfig cfg = build_propagator(config);
  cfg.record_states = record_states;

  const OperatorMatrix h = assemble_full(grid, potential, m);
  const Trajectory trajectory = evolve(h, psi0, cfg, Probe{region, m});
  const ArrivalRecord record = make_arrival_record(trajectory, region, m, config.hazard_floor);
  const ContinuityReport continuity = continuity_residual(trajectory, region, m);
  const HazardReport hazard = hazard_reconstruction(record);

  SimulationSummary s;
  s.warnings = trajectory.warnings;
  s.peak_arrival_time = peak_time(record.times, record.density_flux);
  s.total_arrival_probability = record.cumulative.back();
  s.final_survival = record.survival.back();
  s.max_continuity_residual = continuity.max_abs;
  s.hazard_max_relative_deviation = hazard.max_relative_deviation;
  for (std::size_t i = 0; i < record.size(); ++i) {
    s.max_route_difference = std::max(s.max_route_difference, std::abs(record.density_flux[i] - record.density_norm[i]));
    s.max_norm_drift = std::max(s.max_norm_drift, std::abs(trajectory.norm2[i] - trajectory.norm2.front()));
  }

  PropagatorConfig lockstep = cfg;
  lockstep.record_states = false;
  const RestrictedComparison direct = restricted_vs_projected_diagnostic(
      h, assemble_restricted_direct(h, region), psi0, lockstep, region, m);
  const RestrictedComparison decomposed = restricted_vs_projected_diagnostic(
      h, assemble_restricted_decomposed(grid, region, potential, m), psi0, lockstep, region, m);
  s.restricted_direct_final_norm = direct.survival_restricted.back();
  s.restricted_decomposed_final_norm = decomposed.survival_restricted.back();
  s.restricted_direct_max_difference = direct.max_state_difference;
  s.restricted_decomposed_max_difference = decomposed.max_state_difference;
  s.restricted_direct_rates_agree = direct.initial_rates_agree;
  s.restricted_decomposed_rates_agree = decomposed.initial_rates_agree;

  fs::create_directories(out_dir);
  write_text(out_dir / "config.echo", echo_config(config));
  {
    std::ofstream out = csv::open((out_dir / "trajectory.csv").string());
    write_trajectory_csv(out, trajectory);
  }
  {
    std::ofstream out = csv::open((out_dir / "arrival.csv").string());
    write_arrival_csv(out, record);
  }
  {
    std::ofstream out = csv::open((out_dir / "summary.csv").string());
    write_summary_header(out);
    write_summary_row(out, s);
  }
  if (record_states) {
    const fs::path dir = out_dir / "states";
    fs::create_directories(dir);
    for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
      write_snapshot_csv((dir / ("state_" + format_index(i, trajectory.states.size()) + ".csv")).string(),
                         trajectory.states[i]);
    }
  }
  return s;
}

void write_summary_header(std::ostream& out) {
  csv::write_row(out, {"peak_arrival_time", "total_arrival_probability", "final_survival", "max_continuity_residual",
                       "max_route_difference", "max_norm_drift", "hazard_max_relative_deviation",
                       "restricted_direct_final_norm", "restricted_decomposed_final_norm",
                       "restricted_direct_max_difference", "restricted_decomposed_max_difference",
                       "restricted_direct_rates_agree", "restricted_decomposed_rates_agree"});
}

void write_summary_row(std::ostream& out, const SimulationSummary& s) {
  csv::write_row(out, {s.peak_arrival_time, s.total_arrival_probability, s.final_survival, s.max_continuity_residual,
                       s.max_route_difference, s.max_norm_drift, s.hazard_max_relative_deviation,
                       s.restricted_direct_final_norm, s.restricted_decomposed_final_norm,
                       s.restricted_direct_max_difference, s.restricted_decomposed_max_difference,
                       s.restricted_direct_rates_agree ? 1.0 : 0.0, s.restricted_decomposed_rates_agree ? 1.0 : 0.0});
}

SimulationConfig apply_sweep_value(const SimulationConfig& config, const std::string& parameter, Real value) {
  SimulationConfig c = config;
  if (parameter == "k0") c.packet_k0 = value;
  else if (parameter == "sigma") c.packet_sigma = value;
  else if (parameter == "x_d") {
    c.detector_x_d = value;
    c.detector_a = value;
  } else if (parameter == "dt") c.dt = value;
  else if (parameter == "dx") {
    if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError("dx must be positive");
    const Real cells = (c.grid_x_max - c.grid_x_min) / value;
    const Real rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
      throw ValidationError("dx = " + csv::format(value) + " does not divide the grid length");
    }
    c.grid_n = static_cast<std::size_t>(rounded) + 1;
  } else {
    throw ValidationError("unknown sweep parameter '" + parameter + "' (expected k0, sigma, x_d, dt or dx)");
  }
  return c;
}

int cmd_verify(const SimulationConfig& config, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const VerifyReport report = run_verification(config);
    fs::create_directories(out_dir);
    {
      std::ofstream out = csv::open((out_dir / "verify.txt").string());
      report.write(out);
    }
    report.write(log);
    if (!report.all_passed()) {
      log << "invariant failed: " << report.first_failure() << '\n';
      return static_cast<int>(kExitInvariant);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const SimulationConfig& config, const fs::path& out_dir, bool record_states, std::ostream& log) {
  return guarded(log, [&] {
    const SimulationSummary s = run_simulation(config, out_dir, record_states);
    for (const auto& w : s.warnings) log << "warning: " << w << '\n';
    log << "peak_arrival_time " << csv::format(s.peak_arrival_time) << '\n'
        << "total_arrival_probability " << csv::format(s.total_arrival_probability) << '\n'
        << "max_continuity_residual " << csv::format(s.max_continuity_residual) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const SimulationConfig& config, const SweepSpec& sweep, const fs::path& out_dir, unsigned workers,
              bool record_states, std::ostream& log) {
  return guarded(log, [&] {
    if (sweep.values.empty()) throw ValidationError("sweep value list is empty");
    std::vector<SimulationConfig> configs;
    for (Real v : sweep.values) {
      configs.push_back(apply_sweep_value(config, sweep.parameter, v));
      validate_config(configs.back());
    }

    const std::size_t count = configs.size();
    std::vector<SimulationSummary> summaries(count);
    std::vector<std::exception_ptr> failures(count);
    std::atomic<std::size_t> next{0};
    const auto run_dir = [&](std::size_t i) {
      return out_dir / (sweep.parameter + "_" + format_index(i, count));
    };
    const auto worker = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          summaries[i] = run_simulation(configs[i], run_dir(i), record_states);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };

    const unsigned pool = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < pool; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    for (std::size_t i = 0; i < count; ++i) {
      if (failures[i]) {
        log << "run " << run_dir(i).filename().string() << " failed\n";
        std::rethrow_exception(failures[i]);
      }
    }

    fs::create_directories(out_dir);
    std::ofstream out = csv::open((out_dir / "summary.csv").string());
    out << "parameter,value,directory,";
    write_summary_header(out);
    for (std::size_t i = 0; i < count; ++i) {
      out << sweep.parameter << ',' << csv::format(sweep.values[i]) << ',' << run_dir(i).filename().string() << ',';
      write_summary_row(out, summaries[i]);
      log << sweep.parameter << '=' << csv::format(sweep.values[i])
          << " peak_arrival_time " << csv::format(summaries[i].peak_arrival_time)
          << " max_continuity_residual " << csv::format(summaries[i].max_continuity_residual) << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace qarrival
