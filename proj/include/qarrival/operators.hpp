#pragma once

#include <cstddef>
#include <vector>

#include "qarrival/grid.hpp"
#include "qarrival/states.hpp"
#include "qarrival/types.hpp"

namespace qarrival {

enum class Hermiticity { hermitian, anti_hermitian, general };

// Complex n x n operator on a Grid1D. All operators assembled here are banded
// (bandwidth <= 2) and kept in sparse storage. The hermiticity flag is metadata
// that tests check against the entries.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  OperatorMatrix(const Grid1D& grid, SparseMatrix entries, Hermiticity flag);

  const Grid1D& grid() const { return grid_; }
  const SparseMatrix& entries() const { return entries_; }
  Hermiticity hermiticity() const { return flag_; }
  std::size_t size() const { return grid_.size(); }
  // Largest |i - j| over stored nonzeros.
  std::size_t bandwidth() const { return bandwidth_; }

  DenseMatrix dense() const { return DenseMatrix(entries_); }

  WaveFunction apply(const WaveFunction& psi) const;
  // <psi|M|psi> under the dx-weighted inner product.
  Complex expectation(const WaveFunction& psi) const;
  // <phi|M|psi>
  Complex matrix_element(const WaveFunction& phi, const WaveFunction& psi) const;

  OperatorMatrix adjoint() const;

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(Complex c, const OperatorMatrix& a);

 private:
  Grid1D grid_;
  SparseMatrix entries_;
  Hermiticity flag_ = Hermiticity::general;
  std::size_t bandwidth_ = 0;
};

// Sampled potential V(x_i).
struct Potential {
  RealVector values;

  static Potential zero(const Grid1D& grid);
  // V = height for x >= x_edge, 0 otherwise.
  static Potential step(const Grid1D& grid, Real height, Real x_edge);
  // V = height * exp(-(x - center)^2 / (2 width^2)).
  static Potential gaussian_barrier(const Grid1D& grid, Real height, Real center, Real width);

  Real max() const { return values.maxCoeff(); }
};

// P = -i D_c, central difference with Dirichlet edges.
OperatorMatrix assemble_momentum(const Grid1D& grid);
// H = -L / (2m) + diag(V), L the 3-point Laplacian.
OperatorMatrix assemble_full(const Grid1D& grid, const Potential& potential, Real mass);
// π̄ = diag(χ_D̄).
OperatorMatrix assemble_projector(const Region& region);
// Discrete |x_b><x_b|: 1/dx at (b, b).
OperatorMatrix assemble_point_projector(const Grid1D& grid, std::size_t index);

// H̄ = π̄ H.
OperatorMatrix assemble_restricted_direct(const OperatorMatrix& full, const Region& region);
// N_dec = sum_b sign_b {P, E_b} / (2m).
OperatorMatrix assemble_boundary_J(const Grid1D& grid, const Region& region, Real mass);
// K_term = sum_b sign_b i [P, E_b] / (2m).
OperatorMatrix assemble_boundary_K(const Grid1D& grid, const Region& region, Real mass);
// H̄_dec = P π̄ P / (2m) + π̄ V π̄ + K_term / 2 - (i/2) N_dec.
OperatorMatrix assemble_restricted_decomposed(const Grid1D& grid, const Region& region, const Potential& potential,
                                              Real mass);

// N = i (H̄ - H̄†).
OperatorMatrix flux_operator(const OperatorMatrix& hbar);

// max_ij |H̄† - H̄ - i N|.
Real adjoint_identity_residual(const OperatorMatrix& hbar, const OperatorMatrix& flux);

OperatorMatrix hermitian_part(const OperatorMatrix& m);
OperatorMatrix antihermitian_part(const OperatorMatrix& m);

Real max_abs(const OperatorMatrix& m);
// max_ij |M - M†|.
Real hermiticity_defect(const OperatorMatrix& m);
// max_ij |A - B|.
Real max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b);

// Sorted row/column indices touched by an entry of magnitude > tol.
std::vector<std::size_t> support_indices(const OperatorMatrix& m, Real tol = 0.0);
// True when every index in `support` is within `width` of some boundary index.
bool localized_at_boundary(const std::vector<std::size_t>& support, const Region& region, std::size_t width = 1);

// Largest eigenvalue bound used for the time-step sanity check.
Real spectrum_estimate(const Grid1D& grid, const Potential& potential, Real mass);

}  // namespace qarrival
