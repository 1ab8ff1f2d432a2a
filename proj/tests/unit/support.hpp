#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qarrival/grid.hpp"
#include "qarrival/operators.hpp"
#include "qarrival/states.hpp"

namespace qarrival::testing {

// Fixed-seed source for the property tests; every draw is reproducible.
class Draws {
 public:
  explicit Draws(unsigned seed) : engine_(seed) {}

  Real uniform(Real lo, Real hi) { return std::uniform_real_distribution<Real>(lo, hi)(engine_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }

  // Grid with random extent and size.
  Grid1D grid(std::size_t n_lo = 40, std::size_t n_hi = 200) {
    const Real x_min = uniform(-30.0, -5.0);
    const Real length = uniform(10.0, 60.0);
    return make_grid(x_min, x_min + length, index(n_lo, n_hi));
  }

  // Half-line or interval detector kept a few points away from both edges.
  Region region(const Grid1D& grid) {
    const std::size_t n = grid.size();
    if (index(0, 1) == 0) return make_region(grid, HalfLineDetector{grid.x(index(n / 3, n - 3))});
    const std::size_t a = index(n / 3, n / 2);
    const std::size_t b = index(a + 2, n - 3);
    return make_region(grid, IntervalDetector{grid.x(a), grid.x(b)});
  }

  // Arbitrary complex amplitudes, zero at the two edges.
  WaveFunction state(const Grid1D& grid) {
    ComplexVector a(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = Complex(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    a(0) = a(a.size() - 1) = 0.0;
    return WaveFunction(grid, std::move(a));
  }

  Potential potential(const Grid1D& grid) {
    RealVector v(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(-2.0, 2.0);
    return Potential{v};
  }

 private:
  std::mt19937_64 engine_;
};

inline WaveFunction plane_wave(const Grid1D& grid, Real k) {
  ComplexVector a(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) a(static_cast<Eigen::Index>(i)) = std::polar(1.0, k * grid.x(i));
  return WaveFunction(grid, std::move(a));
}

inline WaveFunction real_gaussian(const Grid1D& grid, Real x0, Real sigma) {
  ComplexVector a(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Real u = (grid.x(i) - x0) / sigma;
    a(static_cast<Eigen::Index>(i)) = std::exp(-0.25 * u * u);
  }
  WaveFunction psi(grid, std::move(a));
  psi.normalize();
  return psi;
}

inline Real max_abs(const std::vector<Real>& v) {
  Real m = 0.0;
  for (Real x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace qarrival::testing
