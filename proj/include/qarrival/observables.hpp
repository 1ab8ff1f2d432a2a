#pragma once

#include <vector>

#include "qarrival/grid.hpp"
#include "qarrival/states.hpp"

namespace qarrival {

struct Trajectory;

// Probability current j(x_i), units 1/time.
using CurrentField = RealVector;

// j_i = Im(conj(psi_i) (D_c psi)_i) / m
CurrentField probability_current(const WaveFunction& psi, Real mass);

// Template form for raw amplitude expressions.
template <typename Derived>
RealVector probability_current(const Eigen::MatrixBase<Derived>& amplitudes, Real dx, Real mass) {
  const auto derivative = central_difference(amplitudes, dx);
  return (amplitudes.conjugate().cwiseProduct(derivative)).imag() / mass;
}

// sum_b sign_b j(x_b), same stencil as N_dec.
Real boundary_flux(const WaveFunction& psi, const Region& region, Real mass);

struct RegionProbability {
  Real survival = 0.0;  // P̄
  Real detector = 0.0;  // P = norm² - P̄
};

// P̄ = sum_i w_i |psi_i|² with the survival weights of the region
// (dx in D̄, dx/2 on boundary points); the remainder is attributed to D.
RegionProbability region_probability(const WaveFunction& psi, const Region& region);

struct ContinuityReport {
  std::vector<Real> times;
  std::vector<Real> residual;
  Real max_abs = 0.0;
};

// r(t_i) = (P̄(t_{i+1}) - P̄(t_{i-1})) / (t_{i+1} - t_{i-1}) + flux(psi(t_i)),
// over interior recorded samples of a unitary trajectory.
ContinuityReport continuity_residual(const Trajectory& trajectory, const Region& region, Real mass);

// -sum_i dx (D_c χ_D̄)_i j_i
Real flux_volume_form(const WaveFunction& psi, const Region& region, Real mass);

// log2(coarse / fine) for a refinement by `factor`.
Real observed_order(Real coarse_error, Real fine_error, Real factor = 2.0);

}  // namespace qarrival
