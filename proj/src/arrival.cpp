#include "qarrival/arrival.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qarrival/csv.hpp"
#include "qarrival/errors.hpp"
#include "qarrival/observables.hpp"

namespace qarrival {

namespace {

void require_initially_outside(const Trajectory& trajectory, const Region& region) {
  if (!(trajectory.grid == region.grid())) throw ValidationError("trajectory and region live on different grids");
  const Real leaked = std::sqrt(detector_part(trajectory.initial, region).norm2());
  if (leaked > 1e-10) {
    throw ValidationError("initial state has amplitude " + csv::format(leaked) + " inside the detector");
  }
}

bool stored_scalars_match(const Trajectory& trajectory, const Region& region) {
  return trajectory.probe && trajectory.probe->region == region;
}

std::vector<Real> survival_series(const Trajectory& trajectory, const Region& region) {
  if (trajectory.states.size() == trajectory.size()) {
    std::vector<Real> s;
    s.reserve(trajectory.size());
    for (const auto& psi : trajectory.states) {
      s.push_back(trajectory.unitary ? region_probability(psi, region).survival : psi.norm2());
    }
    return s;
  }
  if (!stored_scalars_match(trajectory, region)) {
    throw ValidationError("trajectory was recorded with a different region and kept no states");
  }
  return trajectory.survival;
}

// Three-point derivative on a possibly nonuniform mesh.
std::vector<Real> derivative(const std::vector<Real>& t, const std::vector<Real>& f) {
  const std::size_t n = t.size();
  std::vector<Real> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Real h1 = t[i] - t[i - 1];
    const Real h2 = t[i + 1] - t[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
  }
  {
    const Real h1 = t[1] - t[0];
    const Real h2 = t[2] - t[1];
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
           h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const Real h1 = t[n - 2] - t[n - 3];
    const Real h2 = t[n - 1] - t[n - 2];
    d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
               (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
  }
  return d;
}

}  // namespace

std::vector<Real> arrival_density_flux(const Trajectory& trajectory, const Region& region, Real mass) {
  require_initially_outside(trajectory, region);
  if (trajectory.states.size() == trajectory.size()) {
    std::vector<Real> f;
    f.reserve(trajectory.size());
    for (const auto& psi : trajectory.states) f.push_back(boundary_flux(psi, region, mass));
    return f;
  }
  if (!stored_scalars_match(trajectory, region) || trajectory.probe->mass != mass) {
    throw ValidationError("trajectory was recorded with a different region or mass and kept no states");
  }
  return trajectory.flux;
}

std::vector<Real> arrival_density_norm(const Trajectory& trajectory, const Region& region) {
  require_initially_outside(trajectory, region);
  if (trajectory.size() < 3) throw ValidationError("norm-route density needs at least 3 recorded times");
  const std::vector<Real> survival = survival_series(trajectory, region);
  std::vector<Real> d = derivative(trajectory.times, survival);
  for (auto& v : d) v = -v;
  return d;
}

std::vector<Real> cumulative_trapezoid(const std::vector<Real>& times, const std::vector<Real>& values) {
  std::vector<Real> c(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    c[i] = c[i - 1] + 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  }
  return c;
}

ArrivalSplit split_arrival_departure(const std::vector<Real>& density) {
  ArrivalSplit s;
  s.arrival.reserve(density.size());
  s.departure.reserve(density.size());
  for (Real v : density) {
    s.arrival.push_back(std::max(v, 0.0));
    s.departure.push_back(std::max(-v, 0.0));
  }
  return s;
}

ArrivalRecord make_arrival_record(std::vector<Real> times, std::vector<Real> density_flux,
                                  std::vector<Real> density_norm, std::vector<Real> survival, Real hazard_floor) {
  const std::size_t n = times.size();
  if (density_flux.size() != n || density_norm.size() != n || survival.size() != n) {
    throw ValidationError("arrival series have mismatched lengths");
  }
  ArrivalRecord r;
  r.hazard_floor = hazard_floor;
  r.cumulative = cumulative_trapezoid(times, density_flux);
  ArrivalSplit split = split_arrival_departure(density_flux);
  r.pos_part = std::move(split.arrival);
  r.neg_part = std::move(split.departure);
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    inside = inside && survival[i] >= hazard_floor;
    r.valid_window.push_back(inside);
    r.hazard.push_back(inside ? density_flux[i] / survival[i] : std::nan(""));
  }
  r.times = std::move(times);
  r.density_flux = std::move(density_flux);
  r.density_norm = std::move(density_norm);
  r.survival = std::move(survival);
  return r;
}

ArrivalRecord make_arrival_record(const Trajectory& trajectory, const Region& region, Real mass, Real hazard_floor) {
  return make_arrival_record(trajectory.times, arrival_density_flux(trajectory, region, mass),
                             arrival_density_norm(trajectory, region), survival_series(trajectory, region),
                             hazard_floor);
}

HazardReport hazard_reconstruction(const ArrivalRecord& record) {
  HazardReport report;
  std::vector<Real> t, w;
  for (std::size_t i = 0; i < record.size() && record.valid_window[i]; ++i) {
    t.push_back(record.times[i]);
    w.push_back(record.hazard[i]);
  }
  if (t.empty()) throw ValidationError("hazard window is empty: survival never reaches the floor");
  report.window_samples = t.size();

  const std::vector<Real> integrated = cumulative_trapezoid(t, w);
  Real scale = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) scale = std::max(scale, std::abs(record.density_flux[i]));

  report.times = record.times;
  report.reconstructed.assign(record.size(), std::nan(""));
  Real worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Real value = w[i] * std::exp(-integrated[i]);
    report.reconstructed[i] = value;
    worst = std::max(worst, std::abs(value - record.density_flux[i]));
  }
  report.max_relative_deviation = scale > 0.0 ? worst / scale : worst;
  return report;
}

Real peak_time(const std::vector<Real>& times, const std::vector<Real>& density) {
  if (times.empty() || times.size() != density.size()) throw ValidationError("peak_time needs matching series");
  const auto it = std::max_element(density.begin(), density.end());
  const std::size_t k = static_cast<std::size_t>(it - density.begin());
  if (k == 0 || k + 1 == density.size()) return times[k];
  const Real f0 = density[k - 1], f1 = density[k], f2 = density[k + 1];
  const Real curvature = f0 - 2.0 * f1 + f2;
  if (curvature >= 0.0) return times[k];
  const Real offset = 0.5 * (f0 - f2) / curvature;
  const Real h = offset < 0.0 ? times[k] - times[k - 1] : times[k + 1] - times[k];
  return times[k] + offset * h;
}

RestrictedComparison restricted_vs_projected_diagnostic(const OperatorMatrix& full, const OperatorMatrix& hbar,
                                                        const WaveFunction& psi0, const PropagatorConfig& cfg,
                                                        const Region& region, Real mass) {
  if (!(full.grid() == hbar.grid()) || !(full.grid() == region.grid())) {
    throw ValidationError("operators and region live on different grids");
  }
  if (std::sqrt(detector_part(psi0, region).norm2()) > 1e-10) {
    throw ValidationError("initial state must satisfy psi0 = π̄ psi0");
  }

  RestrictedComparison report;
  const Grid1D& grid = full.grid();

  // d/dt <psi|W|psi> = <psi| i[H, W] |psi> with W the survival quadrature.
  SparseMatrix weights(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  const RealVector w = region.survival_weights() / grid.dx();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) != 0.0) weights.insert(i, i) = w(i);
  }
  const OperatorMatrix weight_op(grid, weights, Hermiticity::hermitian);
  const OperatorMatrix commutator = kI * (full * weight_op - weight_op * full);
  report.initial_rate_projected = commutator.expectation(psi0).real();
  report.initial_rate_restricted = -flux_operator(hbar).expectation(psi0).real();
  report.initial_flux = boundary_flux(psi0, region, mass);
  report.rate_tolerance = (cfg.dt * cfg.dt + grid.dx()) * std::max(1.0, std::abs(report.initial_flux));
  report.initial_rates_agree =
      std::abs(report.initial_rate_projected - report.initial_rate_restricted) <= report.rate_tolerance;

  PropagatorConfig lockstep = cfg;
  lockstep.record_states = true;
  const auto observe = [&](const WaveFunction& full_state, const WaveFunction& restricted_state, Real t) {
    const WaveFunction projected = restrict(full_state, region);
    const ComplexVector diff = projected.amplitudes() - restricted_state.amplitudes();
    const Real d = std::sqrt(weighted_norm2(diff, grid.dx()));
    report.times.push_back(t);
    report.state_difference.push_back(d);
    report.survival_projected.push_back(region_probability(full_state, region).survival);
    report.survival_restricted.push_back(restricted_state.norm2());
    report.max_state_difference = std::max(report.max_state_difference, d);
  };

  if (cfg.scheme == Scheme::crank_nicolson) {
    const CrankNicolson full_step(full, cfg.dt);
    const CrankNicolson restricted_step(hbar, cfg.dt);
    WaveFunction a = psi0, b = restrict(psi0, region);
    observe(a, b, 0.0);
    for (std::size_t s = 1; s <= cfg.n_steps; ++s) {
      full_step.step(a);
      restricted_step.step(b);
      if (s % cfg.record_every == 0) observe(a, b, static_cast<Real>(s) * cfg.dt);
    }
  } else {
    const Trajectory ta = evolve(full, psi0, lockstep);
    const Trajectory tb = evolve(hbar, restrict(psi0, region), lockstep);
    for (std::size_t i = 0; i < ta.size(); ++i) observe(ta.states[i], tb.states[i], ta.times[i]);
  }
  return report;
}

void write_arrival_csv(std::ostream& out, const ArrivalRecord& record) {
  csv::write_row(out, {"t", "density_flux", "density_norm", "cumulative", "hazard", "pos_part", "neg_part",
                       "valid_window"});
  for (std::size_t i = 0; i < record.size(); ++i) {
    csv::write_row(out, {record.times[i], record.density_flux[i], record.density_norm[i], record.cumulative[i],
                         record.hazard[i], record.pos_part[i], record.neg_part[i],
                         record.valid_window[i] ? 1.0 : 0.0});
  }
}

}  // namespace qarrival
