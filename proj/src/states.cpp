#include "qarrival/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qarrival/csv.hpp"
#include "qarrival/errors.hpp"

namespace qarrival {

WaveFunction::WaveFunction(const Grid1D& grid, ComplexVector amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != grid_.size()) {
    throw ValidationError("amplitude count does not match grid size");
  }
}

WaveFunction WaveFunction::zero(const Grid1D& grid) {
  return WaveFunction(grid, ComplexVector::Zero(static_cast<Eigen::Index>(grid.size())));
}

Real WaveFunction::edge_amplitude() const {
  const Eigen::Index n = amplitudes_.size();
  return std::max(std::abs(amplitudes_(0)), std::abs(amplitudes_(n - 1)));
}

WaveFunction& WaveFunction::normalize() {
  const Real n2 = norm2();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalError("cannot normalize a zero or non-finite state");
  amplitudes_ /= std::sqrt(n2);
  return *this;
}

Complex inner_product(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("states live on different grids");
  return weighted_inner(a.amplitudes(), b.amplitudes(), a.grid().dx());
}

WaveFunction gaussian_packet(const Grid1D& grid, Real x0, Real sigma, Real k0) {
  if (!(x0 > grid.x_min() && x0 < grid.x_max())) throw ValidationError("packet centre must lie inside the grid");
  if (!(sigma >= 4.0 * grid.dx())) throw ValidationError("packet width sigma must be at least 4*dx");
  const auto envelope = [&](Real x) { return std::exp(-(x - x0) * (x - x0) / (4.0 * sigma * sigma)); };
  if (envelope(grid.x_min()) >= 1e-8 || envelope(grid.x_max()) >= 1e-8) {
    throw ValidationError("packet overlaps the grid edges above 1e-8 of its peak");
  }
  ComplexVector a(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Real x = grid.x(i);
    a(static_cast<Eigen::Index>(i)) = envelope(x) * std::polar(1.0, k0 * x);
  }
  WaveFunction psi(grid, std::move(a));
  psi.normalize();
  return psi;
}

WaveFunction restrict(const WaveFunction& psi, const Region& region) {
  if (!(psi.grid() == region.grid())) throw ValidationError("state and region live on different grids");
  return WaveFunction(psi.grid(), psi.amplitudes().cwiseProduct(region.complement_mask().cast<Complex>()));
}

WaveFunction detector_part(const WaveFunction& psi, const Region& region) {
  if (!(psi.grid() == region.grid())) throw ValidationError("state and region live on different grids");
  return WaveFunction(psi.grid(), psi.amplitudes().cwiseProduct(region.detector_mask().cast<Complex>()));
}

FreeGaussian::FreeGaussian(Real x0, Real sigma, Real k0, Real mass) : x0_(x0), sigma_(sigma), k0_(k0), mass_(mass) {
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
}

Complex FreeGaussian::amplitude(Real x, Real t) const {
  const Complex width{sigma_ * sigma_, t / (2.0 * mass_)};
  const Real shift = x - x0_ - k0_ / mass_ * t;
  const Real norm = std::pow(2.0 * std::numbers::pi * sigma_ * sigma_, -0.25);
  const Complex phase = -shift * shift / (4.0 * width) + kI * (k0_ * x - k0_ * k0_ * t / (2.0 * mass_));
  return norm * std::sqrt(sigma_ * sigma_ / width) * std::exp(phase);
}

Real FreeGaussian::density(Real x, Real t) const { return std::norm(amplitude(x, t)); }

Real FreeGaussian::current(Real x, Real t) const {
  const Complex width{sigma_ * sigma_, t / (2.0 * mass_)};
  const Real shift = x - x0_ - k0_ / mass_ * t;
  const Complex log_derivative = -shift / (2.0 * width) + kI * k0_;
  return density(x, t) * log_derivative.imag() / mass_;
}

Real FreeGaussian::spread(Real t) const {
  const Real tau = t / (2.0 * mass_ * sigma_ * sigma_);
  return sigma_ * std::sqrt(1.0 + tau * tau);
}

WaveFunction FreeGaussian::sample(const Grid1D& grid, Real t) const {
  ComplexVector a(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) a(static_cast<Eigen::Index>(i)) = amplitude(grid.x(i), t);
  return WaveFunction(grid, std::move(a));
}

void write_snapshot_csv(std::ostream& out, const WaveFunction& psi) {
  csv::write_row(out, {"x", "re_psi", "im_psi"});
  for (std::size_t i = 0; i < psi.grid().size(); ++i) {
    csv::write_row(out, {psi.grid().x(i), psi(i).real(), psi(i).imag()});
  }
}

void write_snapshot_csv(const std::string& path, const WaveFunction& psi) {
  auto out = csv::open(path);
  write_snapshot_csv(out, psi);
}

}  // namespace qarrival
