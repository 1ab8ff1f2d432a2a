#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "qarrival/arrival.hpp"
#include "qarrival/dynamics.hpp"
#include "qarrival/grid.hpp"
#include "qarrival/operators.hpp"
#include "qarrival/states.hpp"

namespace qarrival {

enum class PotentialKind { zero, step, gaussian_barrier };
enum class DetectorKind { half_line, interval };

// Flat key/value simulation configuration, e.g.
//
//   grid.n = 3201
//   packet.k0 = 2
//   detector.kind = half_line
//
// Unknown or repeated keys are rejected.
struct SimulationConfig {
  Real grid_x_min = -40.0;
  Real grid_x_max = 120.0;
  std::size_t grid_n = 3201;

  Real mass = 1.0;

  PotentialKind potential_kind = PotentialKind::zero;
  Real potential_height = 0.0;
  Real potential_x_edge = 0.0;
  Real potential_center = 0.0;
  Real potential_width = 1.0;

  Real packet_x0 = -10.0;
  Real packet_sigma = 1.0;
  Real packet_k0 = 2.0;

  DetectorKind detector_kind = DetectorKind::half_line;
  Real detector_x_d = 5.0;
  Real detector_a = 5.0;
  Real detector_b = 8.0;

  Real dt = 0.005;
  Real duration = 15.0;
  std::size_t record_every = 5;

  Real hazard_floor = kDefaultHazardFloor;

  std::string output_dir = "out";

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::string& path);
// Canonical text form listing every key; parse_config(echo_config(c)) == c.
std::string echo_config(const SimulationConfig& config);

// Sets a single key from its textual value.
void set_config_value(SimulationConfig& config, std::string_view key, std::string_view value);

// Builds every derived object once, so that any precondition failure
// surfaces as a ValidationError before a run starts.
void validate_config(const SimulationConfig& config);

Grid1D build_grid(const SimulationConfig& config);
Region build_region(const SimulationConfig& config);
Potential build_potential(const SimulationConfig& config);
WaveFunction build_packet(const SimulationConfig& config);
PropagatorConfig build_propagator(const SimulationConfig& config);
std::size_t step_count(const SimulationConfig& config);

}  // namespace qarrival
