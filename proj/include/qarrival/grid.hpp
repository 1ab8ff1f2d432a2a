#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "qarrival/types.hpp"

namespace qarrival {

// Uniform 1D lattice x_i = x_min + i*dx, i in [0, n-1], Dirichlet beyond the edges.
class Grid1D {
 public:
  Grid1D() = default;

  Real x_min() const { return x_min_; }
  Real x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  Real dx() const { return dx_; }

  Real x(std::size_t i) const { return x_min_ + static_cast<Real>(i) * dx_; }
  RealVector points() const;

  // Index of the grid point within `tol_fraction * dx` of `position`, throws otherwise.
  std::size_t snap(Real position, Real tol_fraction = 1e-6) const;

  // Trapezoid quadrature of sampled values (half weight at both edges).
  template <typename Derived>
  auto integrate(const Eigen::MatrixBase<Derived>& f) const {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = f.size();
    Scalar sum = f.sum() - Scalar(0.5) * (f(0) + f(n - 1));
    return sum * Scalar(dx_);
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  friend Grid1D make_grid(Real x_min, Real x_max, std::size_t n);
  Grid1D(Real x_min, Real x_max, std::size_t n);

  Real x_min_ = 0.0;
  Real x_max_ = 0.0;
  std::size_t n_ = 0;
  Real dx_ = 0.0;
};

Grid1D make_grid(Real x_min, Real x_max, std::size_t n);

// Detector D as a half-line x >= x_d.
struct HalfLineDetector {
  Real x_d = 0.0;
  friend bool operator==(const HalfLineDetector&, const HalfLineDetector&) = default;
};

// Detector D as the closed interval [a, b].
struct IntervalDetector {
  Real a = 0.0;
  Real b = 0.0;
  friend bool operator==(const IntervalDetector&, const IntervalDetector&) = default;
};

using DetectorSpec = std::variant<HalfLineDetector, IntervalDetector>;

// A point of the integration surface. `index` is the last D̄ point next to D;
// `outward_sign` is +1 when D lies at larger x, -1 otherwise.
struct BoundaryPoint {
  std::size_t index = 0;
  int outward_sign = +1;
  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;
};

// Partition of the grid into detector D and complement D̄.
class Region {
 public:
  const Grid1D& grid() const { return grid_; }
  const DetectorSpec& spec() const { return spec_; }

  // χ_D̄ as a 0/1 vector.
  const RealVector& complement_mask() const { return complement_mask_; }
  RealVector detector_mask() const;
  const std::vector<BoundaryPoint>& boundary() const { return boundary_; }

  // First and last detector indices (inclusive).
  std::size_t detector_first() const { return detector_first_; }
  std::size_t detector_last() const { return detector_last_; }
  std::size_t complement_count() const;

  // Quadrature weights of D̄ with the surface sitting on the boundary points:
  // dx inside D̄, dx/2 at boundary indices, 0 in D.
  RealVector survival_weights() const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  friend Region make_region(const Grid1D& grid, const DetectorSpec& spec);
  Region() = default;

  Grid1D grid_;
  DetectorSpec spec_;
  RealVector complement_mask_;
  std::vector<BoundaryPoint> boundary_;
  std::size_t detector_first_ = 0;
  std::size_t detector_last_ = 0;
};

Region make_region(const Grid1D& grid, const DetectorSpec& spec);

RealVector characteristic_vector(const Region& region);

}  // namespace qarrival
