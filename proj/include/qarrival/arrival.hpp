#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qarrival/dynamics.hpp"
#include "qarrival/grid.hpp"
#include "qarrival/operators.hpp"

namespace qarrival {

inline constexpr Real kDefaultHazardFloor = 0.05;

struct ArrivalRecord {
  std::vector<Real> times;
  std::vector<Real> density_flux;  // boundary flux of the current
  std::vector<Real> density_norm;  // -dP̄/dt by finite differences
  std::vector<Real> survival;      // P̄(t)
  std::vector<Real> cumulative;    // P(t) = trapezoid integral of density_flux
  std::vector<Real> hazard;        // density_flux / P̄ inside the window, NaN outside
  std::vector<Real> pos_part;      // arrival density
  std::vector<Real> neg_part;      // departure density
  std::vector<bool> valid_window;  // P̄ >= floor on [0, t]
  Real hazard_floor = kDefaultHazardFloor;

  std::size_t size() const { return times.size(); }
};

// Boundary flux of every recorded state. Requires psi(0) = π̄ psi(0) within 1e-10.
std::vector<Real> arrival_density_flux(const Trajectory& trajectory, const Region& region, Real mass);

// Second-order finite difference of -P̄ over the recorded times
// (centred inside, three-point one-sided at the ends).
std::vector<Real> arrival_density_norm(const Trajectory& trajectory, const Region& region);

// Assembles a record from series already on a common time mesh.
ArrivalRecord make_arrival_record(std::vector<Real> times, std::vector<Real> density_flux,
                                  std::vector<Real> density_norm, std::vector<Real> survival,
                                  Real hazard_floor = kDefaultHazardFloor);

ArrivalRecord make_arrival_record(const Trajectory& trajectory, const Region& region, Real mass,
                                  Real hazard_floor = kDefaultHazardFloor);

struct HazardReport {
  std::vector<Real> times;
  std::vector<Real> reconstructed;  // w(t) exp(-∫ w), NaN outside the window
  Real max_relative_deviation = 0.0;
  std::size_t window_samples = 0;
};

// w e^{-∫w} against the flux density over the valid window; deviation is
// relative to max |density| on the window.
HazardReport hazard_reconstruction(const ArrivalRecord& record);

struct ArrivalSplit {
  std::vector<Real> arrival;
  std::vector<Real> departure;
};

ArrivalSplit split_arrival_departure(const std::vector<Real>& density);

// Trapezoid rule on an arbitrary increasing mesh, cumulative from the first sample.
std::vector<Real> cumulative_trapezoid(const std::vector<Real>& times, const std::vector<Real>& values);

// Time of the largest density sample, refined by a parabola through its neighbours.
Real peak_time(const std::vector<Real>& times, const std::vector<Real>& density);

struct RestrictedComparison {
  std::vector<Real> times;
  std::vector<Real> state_difference;  // |π̄ psi_full(t) - psi_restricted(t)|
  std::vector<Real> survival_projected;
  std::vector<Real> survival_restricted;
  Real initial_rate_projected = 0.0;   // d/dt P̄ of the unitary run at t = 0
  Real initial_rate_restricted = 0.0;  // d/dt |psi|² of the restricted run at t = 0
  Real initial_flux = 0.0;             // boundary_flux(psi0)
  Real rate_tolerance = 0.0;
  bool initial_rates_agree = false;
  Real max_state_difference = 0.0;
};

// Evolves psi0 under H and under H̄ and compares π̄ e^{-iHt} psi0 with e^{-iH̄t} psi0.
// Only the t = 0 rates are judged; later discrepancies are reported.
RestrictedComparison restricted_vs_projected_diagnostic(const OperatorMatrix& full, const OperatorMatrix& hbar,
                                                        const WaveFunction& psi0, const PropagatorConfig& cfg,
                                                        const Region& region, Real mass);

// CSV: t,density_flux,density_norm,cumulative,hazard,pos_part,neg_part,valid_window
void write_arrival_csv(std::ostream& out, const ArrivalRecord& record);

}  // namespace qarrival
