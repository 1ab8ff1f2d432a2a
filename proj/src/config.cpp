#include "qarrival/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qarrival/csv.hpp"
#include "qarrival/errors.hpp"

namespace qarrival {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Real parse_real(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  errno = 0;
  const Real v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ValidationError("key '" + std::string(key) + "': cannot parse '" + text + "' as a number");
  }
  return v;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                          "' as a non-negative integer");
  }
  return v;
}

std::string_view potential_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::step: return "step";
    case PotentialKind::gaussian_barrier: return "gaussian_barrier";
  }
  return "zero";
}

std::string_view detector_name(DetectorKind k) { return k == DetectorKind::half_line ? "half_line" : "interval"; }

}  // namespace

void set_config_value(SimulationConfig& c, std::string_view key, std::string_view value) {
  if (key == "grid.x_min") c.grid_x_min = parse_real(key, value);
  else if (key == "grid.x_max") c.grid_x_max = parse_real(key, value);
  else if (key == "grid.n") c.grid_n = parse_count(key, value);
  else if (key == "particle.mass") c.mass = parse_real(key, value);
  else if (key == "potential.kind") {
    if (value == "zero") c.potential_kind = PotentialKind::zero;
    else if (value == "step") c.potential_kind = PotentialKind::step;
    else if (value == "gaussian_barrier") c.potential_kind = PotentialKind::gaussian_barrier;
    else throw ValidationError("unknown potential.kind '" + std::string(value) + "'");
  }
  else if (key == "potential.height") c.potential_height = parse_real(key, value);
  else if (key == "potential.x_edge") c.potential_x_edge = parse_real(key, value);
  else if (key == "potential.center") c.potential_center = parse_real(key, value);
  else if (key == "potential.width") c.potential_width = parse_real(key, value);
  else if (key == "packet.x0") c.packet_x0 = parse_real(key, value);
  else if (key == "packet.sigma") c.packet_sigma = parse_real(key, value);
  else if (key == "packet.k0") c.packet_k0 = parse_real(key, value);
  else if (key == "detector.kind") {
    if (value == "half_line") c.detector_kind = DetectorKind::half_line;
    else if (value == "interval") c.detector_kind = DetectorKind::interval;
    else throw ValidationError("unknown detector.kind '" + std::string(value) + "'");
  }
  else if (key == "detector.x_d") c.detector_x_d = parse_real(key, value);
  else if (key == "detector.a") c.detector_a = parse_real(key, value);
  else if (key == "detector.b") c.detector_b = parse_real(key, value);
  else if (key == "propagation.dt") c.dt = parse_real(key, value);
  else if (key == "propagation.T") c.duration = parse_real(key, value);
  else if (key == "propagation.record_every") c.record_every = parse_count(key, value);
  else if (key == "analysis.hazard_floor") c.hazard_floor = parse_real(key, value);
  else if (key == "output.dir") c.output_dir = std::string(value);
  else throw ValidationError("unknown configuration key '" + std::string(key) + "'");
}

SimulationConfig parse_config(std::string_view text) {
  SimulationConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) throw ValidationError("duplicate key '" + std::string(key) + "'");
    set_config_value(config, key, value);
  }
  return config;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string echo_config(const SimulationConfig& c) {
  std::ostringstream out;
  const auto line = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  const auto real = [&](std::string_view key, Real v) { line(key, csv::format(v)); };
  real("grid.x_min", c.grid_x_min);
  real("grid.x_max", c.grid_x_max);
  line("grid.n", std::to_string(c.grid_n));
  real("particle.mass", c.mass);
  line("potential.kind", std::string(potential_name(c.potential_kind)));
  real("potential.height", c.potential_height);
  real("potential.x_edge", c.potential_x_edge);
  real("potential.center", c.potential_center);
  real("potential.width", c.potential_width);
  real("packet.x0", c.packet_x0);
  real("packet.sigma", c.packet_sigma);
  real("packet.k0", c.packet_k0);
  line("detector.kind", std::string(detector_name(c.detector_kind)));
  real("detector.x_d", c.detector_x_d);
  real("detector.a", c.detector_a);
  real("detector.b", c.detector_b);
  real("propagation.dt", c.dt);
  real("propagation.T", c.duration);
  line("propagation.record_every", std::to_string(c.record_every));
  real("analysis.hazard_floor", c.hazard_floor);
  line("output.dir", c.output_dir);
  return out.str();
}

Grid1D build_grid(const SimulationConfig& c) { return make_grid(c.grid_x_min, c.grid_x_max, c.grid_n); }

Region build_region(const SimulationConfig& c) {
  const Grid1D grid = build_grid(c);
  if (c.detector_kind == DetectorKind::half_line) return make_region(grid, HalfLineDetector{c.detector_x_d});
  return make_region(grid, IntervalDetector{c.detector_a, c.detector_b});
}

Potential build_potential(const SimulationConfig& c) {
  const Grid1D grid = build_grid(c);
  switch (c.potential_kind) {
    case PotentialKind::zero: return Potential::zero(grid);
    case PotentialKind::step: return Potential::step(grid, c.potential_height, c.potential_x_edge);
    case PotentialKind::gaussian_barrier:
      return Potential::gaussian_barrier(grid, c.potential_height, c.potential_center, c.potential_width);
  }
  return Potential::zero(grid);
}

WaveFunction build_packet(const SimulationConfig& c) {
  return gaussian_packet(build_grid(c), c.packet_x0, c.packet_sigma, c.packet_k0);
}

std::size_t step_count(const SimulationConfig& c) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ValidationError("propagation.dt must be positive");
  if (!(c.duration > 0.0) || !std::isfinite(c.duration)) throw ValidationError("propagation.T must be positive");
  const Real ratio = c.duration / c.dt;
  const Real rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError("propagation.T must be an integer multiple of propagation.dt");
  }
  return static_cast<std::size_t>(rounded);
}

PropagatorConfig build_propagator(const SimulationConfig& c) {
  PropagatorConfig p;
  p.dt = c.dt;
  p.n_steps = step_count(c);
  p.record_every = c.record_every;
  return p;
}

void validate_config(const SimulationConfig& c) {
  if (!(c.mass > 0.0) || !std::isfinite(c.mass)) throw ValidationError("particle.mass must be positive");
  if (c.record_every == 0) throw ValidationError("propagation.record_every must be at least 1");
  if (!(c.hazard_floor > 0.0 && c.hazard_floor < 1.0)) {
    throw ValidationError("analysis.hazard_floor must lie in (0, 1)");
  }
  const Region region = build_region(c);
  const Potential potential = build_potential(c);
  if (!potential.values.allFinite()) throw ValidationError("potential must be finite");
  const WaveFunction psi = build_packet(c);
  if (std::sqrt(detector_part(psi, region).norm2()) > 1e-10) {
    throw ValidationError("initial packet must start outside the detector");
  }
  const std::size_t steps = step_count(c);
  if (steps < 2 * c.record_every) throw ValidationError("run must record at least 3 times");
  if (c.output_dir.empty()) throw ValidationError("output.dir must not be empty");
}

}  // namespace qarrival
