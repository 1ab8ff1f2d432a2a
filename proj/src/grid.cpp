#include "qarrival/grid.hpp"

#include <cmath>
#include <string>

#include "qarrival/errors.hpp"

namespace qarrival {

Grid1D::Grid1D(Real x_min, Real x_max, std::size_t n)
    : x_min_(x_min), x_max_(x_max), n_(n), dx_((x_max - x_min) / static_cast<Real>(n - 1)) {}

Grid1D make_grid(Real x_min, Real x_max, std::size_t n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ValidationError("grid bounds must be finite");
  }
  if (!(x_min < x_max)) {
    throw ValidationError("grid requires x_min < x_max");
  }
  if (n < 3) {
    throw ValidationError("grid requires at least 3 points, got " + std::to_string(n));
  }
  return Grid1D(x_min, x_max, n);
}

RealVector Grid1D::points() const {
  RealVector xs(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) xs(static_cast<Eigen::Index>(i)) = x(i);
  return xs;
}

std::size_t Grid1D::snap(Real position, Real tol_fraction) const {
  if (!std::isfinite(position)) throw ValidationError("position must be finite");
  const Real s = (position - x_min_) / dx_;
  const Real r = std::round(s);
  if (r < 0.0 || r > static_cast<Real>(n_ - 1)) {
    throw ValidationError("position " + std::to_string(position) + " lies outside the grid");
  }
  if (std::abs(s - r) > tol_fraction) {
    throw ValidationError("position " + std::to_string(position) + " does not fall on a grid point");
  }
  return static_cast<std::size_t>(r);
}

namespace {

struct Layout {
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<BoundaryPoint> boundary;
};

Layout layout_for(const Grid1D& grid, const HalfLineDetector& d) {
  const std::size_t n = grid.size();
  const std::size_t i_d = grid.snap(d.x_d);
  if (i_d == 0 || i_d >= n - 1) {
    throw ValidationError("detector boundary must lie strictly inside the grid");
  }
  return {i_d, n - 1, {{i_d - 1, +1}}};
}

Layout layout_for(const Grid1D& grid, const IntervalDetector& d) {
  const std::size_t n = grid.size();
  if (!(d.a < d.b)) throw ValidationError("interval detector requires a < b");
  const std::size_t ia = grid.snap(d.a);
  const std::size_t ib = grid.snap(d.b);
  if (ia == 0 || ib >= n - 1) {
    throw ValidationError("interval detector must not touch the grid edges");
  }
  return {ia, ib, {{ia - 1, +1}, {ib + 1, -1}}};
}

}  // namespace

Region make_region(const Grid1D& grid, const DetectorSpec& spec) {
  if (grid.size() < 3) throw ValidationError("region requires a constructed grid");
  const Layout layout = std::visit([&](const auto& d) { return layout_for(grid, d); }, spec);

  const std::size_t n = grid.size();
  const std::size_t detector_points = layout.last - layout.first + 1;
  if (detector_points < 2) throw ValidationError("detector must contain at least 2 grid points");
  if (n - detector_points < 2) throw ValidationError("complement must contain at least 2 grid points");

  Region region;
  region.grid_ = grid;
  region.spec_ = spec;
  region.complement_mask_ = RealVector::Ones(static_cast<Eigen::Index>(n));
  region.complement_mask_
      .segment(static_cast<Eigen::Index>(layout.first), static_cast<Eigen::Index>(detector_points))
      .setZero();
  region.boundary_ = layout.boundary;
  region.detector_first_ = layout.first;
  region.detector_last_ = layout.last;
  return region;
}

RealVector Region::detector_mask() const {
  return RealVector::Ones(complement_mask_.size()) - complement_mask_;
}

std::size_t Region::complement_count() const {
  return grid_.size() - (detector_last_ - detector_first_ + 1);
}

RealVector Region::survival_weights() const {
  RealVector w = grid_.dx() * complement_mask_;
  for (const auto& b : boundary_) w(static_cast<Eigen::Index>(b.index)) = 0.5 * grid_.dx();
  return w;
}

RealVector characteristic_vector(const Region& region) { return region.complement_mask(); }

}  // namespace qarrival
