#include "qarrival/observables.hpp"

#include <cmath>

#include "qarrival/dynamics.hpp"
#include "qarrival/errors.hpp"

namespace qarrival {

namespace {

void require_positive_mass(Real mass) {
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
}

void require_region_grid(const WaveFunction& psi, const Region& region) {
  if (!(psi.grid() == region.grid())) throw ValidationError("state and region live on different grids");
}

Real current_at(const WaveFunction& psi, std::size_t i, Real mass) {
  const std::size_t n = psi.grid().size();
  const Complex right = i + 1 < n ? psi(i + 1) : Complex(0.0);
  const Complex left = i > 0 ? psi(i - 1) : Complex(0.0);
  const Complex derivative = (right - left) / (2.0 * psi.grid().dx());
  return (std::conj(psi(i)) * derivative).imag() / mass;
}

}  // namespace

CurrentField probability_current(const WaveFunction& psi, Real mass) {
  require_positive_mass(mass);
  return probability_current(psi.amplitudes(), psi.grid().dx(), mass);
}

Real boundary_flux(const WaveFunction& psi, const Region& region, Real mass) {
  require_positive_mass(mass);
  require_region_grid(psi, region);
  Real total = 0.0;
  for (const auto& b : region.boundary()) total += b.outward_sign * current_at(psi, b.index, mass);
  return total;
}

RegionProbability region_probability(const WaveFunction& psi, const Region& region) {
  require_region_grid(psi, region);
  const RealVector density = psi.amplitudes().cwiseAbs2();
  const Real survival = region.survival_weights().dot(density);
  return {survival, psi.norm2() - survival};
}

ContinuityReport continuity_residual(const Trajectory& trajectory, const Region& region, Real mass) {
  require_positive_mass(mass);
  if (!trajectory.unitary) throw ValidationError("continuity residual needs a unitary trajectory");
  if (!(trajectory.grid == region.grid())) throw ValidationError("trajectory and region live on different grids");
  const std::size_t n = trajectory.size();
  if (n < 3) throw ValidationError("continuity residual needs at least 3 recorded times");

  std::vector<Real> survival(n), flux(n);
  if (trajectory.states.size() == n) {
    for (std::size_t i = 0; i < n; ++i) {
      survival[i] = region_probability(trajectory.states[i], region).survival;
      flux[i] = boundary_flux(trajectory.states[i], region, mass);
    }
  } else {
    if (!trajectory.probe || !(trajectory.probe->region == region) || trajectory.probe->mass != mass) {
      throw ValidationError("trajectory was recorded with a different region or mass and kept no states");
    }
    survival = trajectory.survival;
    flux = trajectory.flux;
  }

  ContinuityReport report;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Real rate = (survival[i + 1] - survival[i - 1]) / (trajectory.times[i + 1] - trajectory.times[i - 1]);
    const Real r = rate + flux[i];
    report.times.push_back(trajectory.times[i]);
    report.residual.push_back(r);
    report.max_abs = std::max(report.max_abs, std::abs(r));
  }
  return report;
}

Real flux_volume_form(const WaveFunction& psi, const Region& region, Real mass) {
  require_positive_mass(mass);
  require_region_grid(psi, region);
  const RealVector gradient = central_difference(region.complement_mask(), psi.grid().dx());
  const CurrentField j = probability_current(psi, mass);
  // The one-sided Dirichlet edge terms of D_c χ are artefacts of the zero
  // extension, not of the detector surface.
  RealVector g = gradient;
  g(0) = 0.0;
  g(g.size() - 1) = 0.0;
  return -psi.grid().dx() * g.dot(j);
}

Real observed_order(Real coarse_error, Real fine_error, Real factor) {
  return std::log(coarse_error / fine_error) / std::log(factor);
}

}  // namespace qarrival
