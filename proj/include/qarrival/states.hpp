#pragma once

#include <iosfwd>
#include <string>

#include "qarrival/grid.hpp"
#include "qarrival/types.hpp"

namespace qarrival {

// <a|b> = dx * sum conj(a_i) b_i
template <typename DerivedA, typename DerivedB>
Complex weighted_inner(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, Real dx) {
  return dx * a.dot(b);
}

template <typename Derived>
Real weighted_norm2(const Eigen::MatrixBase<Derived>& a, Real dx) {
  return dx * a.squaredNorm();
}

// Central difference with zero samples beyond both edges.
template <typename Derived>
Vector<typename Derived::Scalar> central_difference(const Eigen::MatrixBase<Derived>& f, Real dx) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.size();
  Vector<Scalar> d(n);
  const Scalar h = Scalar(0.5 / dx);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar right = i + 1 < n ? Scalar(f(i + 1)) : Scalar(0);
    const Scalar left = i > 0 ? Scalar(f(i - 1)) : Scalar(0);
    d(i) = (right - left) * h;
  }
  return d;
}

class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(const Grid1D& grid, ComplexVector amplitudes);
  static WaveFunction zero(const Grid1D& grid);

  const Grid1D& grid() const { return grid_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  ComplexVector& amplitudes() { return amplitudes_; }
  Complex operator()(std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

  Real norm2() const { return weighted_norm2(amplitudes_, grid_.dx()); }
  // Max of |psi| over the two edge samples.
  Real edge_amplitude() const;
  WaveFunction& normalize();

  friend bool operator==(const WaveFunction&, const WaveFunction&) = default;

 private:
  Grid1D grid_;
  ComplexVector amplitudes_;
};

Complex inner_product(const WaveFunction& a, const WaveFunction& b);

// psi(x) ∝ exp(-(x-x0)^2 / (4 sigma^2)) exp(i k0 x), normalized, real positive envelope.
WaveFunction gaussian_packet(const Grid1D& grid, Real x0, Real sigma, Real k0);

// Pointwise mask by χ_D̄.
WaveFunction restrict(const WaveFunction& psi, const Region& region);
// Pointwise mask by the detector indicator.
WaveFunction detector_part(const WaveFunction& psi, const Region& region);

// Closed-form free-particle Gaussian (hbar = 1) with complex width σ² + i t / (2m).
class FreeGaussian {
 public:
  FreeGaussian(Real x0, Real sigma, Real k0, Real mass);

  Complex amplitude(Real x, Real t) const;
  Real density(Real x, Real t) const;
  // j = Im(conj(psi) d_x psi) / m, evaluated from the closed-form derivative.
  Real current(Real x, Real t) const;
  // Position standard deviation σ sqrt(1 + (t / (2 m σ²))²).
  Real spread(Real t) const;

  WaveFunction sample(const Grid1D& grid, Real t) const;

 private:
  Real x0_;
  Real sigma_;
  Real k0_;
  Real mass_;
};

// CSV snapshot: x,re_psi,im_psi with 17 significant digits.
void write_snapshot_csv(std::ostream& out, const WaveFunction& psi);
void write_snapshot_csv(const std::string& path, const WaveFunction& psi);

}  // namespace qarrival
