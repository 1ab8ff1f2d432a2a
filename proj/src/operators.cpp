#include "qarrival/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "qarrival/errors.hpp"

namespace qarrival {

namespace {

using Triplet = Eigen::Triplet<Complex>;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(idx(n), idx(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

Hermiticity combine_sum(Hermiticity a, Hermiticity b) { return a == b ? a : Hermiticity::general; }

void require_same_grid(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("operators live on different grids");
}

void require_positive_mass(Real mass) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass must be positive");
}

}  // namespace

OperatorMatrix::OperatorMatrix(const Grid1D& grid, SparseMatrix entries, Hermiticity flag)
    : grid_(grid), entries_(std::move(entries)), flag_(flag) {
  if (entries_.rows() != idx(grid_.size()) || entries_.cols() != idx(grid_.size())) {
    throw ValidationError("operator dimension does not match grid size");
  }
  entries_.prune(Complex(0.0));
  entries_.makeCompressed();
  for (Eigen::Index k = 0; k < entries_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(entries_, k); it; ++it) {
      bandwidth_ = std::max<std::size_t>(bandwidth_, static_cast<std::size_t>(std::abs(it.row() - it.col())));
    }
  }
}

WaveFunction OperatorMatrix::apply(const WaveFunction& psi) const {
  if (!(psi.grid() == grid_)) throw ValidationError("state and operator live on different grids");
  return WaveFunction(grid_, entries_ * psi.amplitudes());
}

Complex OperatorMatrix::expectation(const WaveFunction& psi) const { return matrix_element(psi, psi); }

Complex OperatorMatrix::matrix_element(const WaveFunction& phi, const WaveFunction& psi) const {
  if (!(psi.grid() == grid_) || !(phi.grid() == grid_)) {
    throw ValidationError("state and operator live on different grids");
  }
  const ComplexVector m_psi = entries_ * psi.amplitudes();
  return weighted_inner(phi.amplitudes(), m_psi, grid_.dx());
}

OperatorMatrix OperatorMatrix::adjoint() const {
  SparseMatrix adj = entries_.adjoint();
  return OperatorMatrix(grid_, std::move(adj), flag_);
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_grid(a, b);
  return OperatorMatrix(a.grid_, a.entries_ + b.entries_, combine_sum(a.flag_, b.flag_));
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_grid(a, b);
  return OperatorMatrix(a.grid_, a.entries_ - b.entries_, combine_sum(a.flag_, b.flag_));
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_grid(a, b);
  SparseMatrix product = a.entries_ * b.entries_;
  return OperatorMatrix(a.grid_, std::move(product), Hermiticity::general);
}

OperatorMatrix operator*(Complex c, const OperatorMatrix& a) {
  Hermiticity flag = Hermiticity::general;
  if (c.imag() == 0.0) {
    flag = a.flag_;
  } else if (c.real() == 0.0 && a.flag_ != Hermiticity::general) {
    flag = a.flag_ == Hermiticity::hermitian ? Hermiticity::anti_hermitian : Hermiticity::hermitian;
  }
  return OperatorMatrix(a.grid_, SparseMatrix(c * a.entries_), flag);
}

Potential Potential::zero(const Grid1D& grid) { return {RealVector::Zero(idx(grid.size()))}; }

Potential Potential::step(const Grid1D& grid, Real height, Real x_edge) {
  RealVector v(idx(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v(idx(i)) = grid.x(i) >= x_edge ? height : 0.0;
  if (!v.allFinite()) throw ValidationError("potential must be finite");
  return {v};
}

Potential Potential::gaussian_barrier(const Grid1D& grid, Real height, Real center, Real width) {
  if (!(width > 0.0)) throw ValidationError("barrier width must be positive");
  RealVector v(idx(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Real u = (grid.x(i) - center) / width;
    v(idx(i)) = height * std::exp(-0.5 * u * u);
  }
  if (!v.allFinite()) throw ValidationError("potential must be finite");
  return {v};
}

OperatorMatrix assemble_momentum(const Grid1D& grid) {
  const std::size_t n = grid.size();
  const Complex off = -kI / (2.0 * grid.dx());
  std::vector<Triplet> t;
  t.reserve(2 * n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.emplace_back(idx(i), idx(i + 1), off);
    t.emplace_back(idx(i + 1), idx(i), -off);
  }
  return OperatorMatrix(grid, from_triplets(n, t), Hermiticity::hermitian);
}

OperatorMatrix assemble_full(const Grid1D& grid, const Potential& potential, Real mass) {
  require_positive_mass(mass);
  const std::size_t n = grid.size();
  if (static_cast<std::size_t>(potential.values.size()) != n) throw ValidationError("potential size mismatch");
  if (!potential.values.allFinite()) throw ValidationError("potential must be finite");
  const Real kinetic = 1.0 / (2.0 * mass * grid.dx() * grid.dx());
  std::vector<Triplet> t;
  t.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    t.emplace_back(idx(i), idx(i), 2.0 * kinetic + potential.values(idx(i)));
    if (i + 1 < n) {
      t.emplace_back(idx(i), idx(i + 1), -kinetic);
      t.emplace_back(idx(i + 1), idx(i), -kinetic);
    }
  }
  return OperatorMatrix(grid, from_triplets(n, t), Hermiticity::hermitian);
}

OperatorMatrix assemble_projector(const Region& region) {
  const std::size_t n = region.grid().size();
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    if (region.complement_mask()(idx(i)) != 0.0) t.emplace_back(idx(i), idx(i), 1.0);
  }
  return OperatorMatrix(region.grid(), from_triplets(n, t), Hermiticity::hermitian);
}

OperatorMatrix assemble_point_projector(const Grid1D& grid, std::size_t index) {
  if (index >= grid.size()) throw ValidationError("point projector index out of range");
  return OperatorMatrix(grid, from_triplets(grid.size(), {Triplet(idx(index), idx(index), 1.0 / grid.dx())}),
                        Hermiticity::hermitian);
}

OperatorMatrix assemble_restricted_direct(const OperatorMatrix& full, const Region& region) {
  if (!(full.grid() == region.grid())) throw ValidationError("operator and region live on different grids");
  SparseMatrix rows = full.entries();
  const RealVector& chi = region.complement_mask();
  for (Eigen::Index k = 0; k < rows.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(rows, k); it; ++it) it.valueRef() *= chi(it.row());
  }
  return OperatorMatrix(full.grid(), std::move(rows), Hermiticity::general);
}

namespace {

// sum_b sign_b (P E_b + phase * E_b P)
OperatorMatrix boundary_pairing(const Grid1D& grid, const Region& region, Complex phase) {
  const OperatorMatrix p = assemble_momentum(grid);
  SparseMatrix acc(idx(grid.size()), idx(grid.size()));
  for (const auto& b : region.boundary()) {
    const OperatorMatrix e = assemble_point_projector(grid, b.index);
    const SparseMatrix term = (p * e).entries() + phase * (e * p).entries();
    acc += static_cast<Real>(b.outward_sign) * term;
  }
  return OperatorMatrix(grid, std::move(acc), Hermiticity::general);
}

}  // namespace

OperatorMatrix assemble_boundary_J(const Grid1D& grid, const Region& region, Real mass) {
  require_positive_mass(mass);
  const OperatorMatrix pairing = boundary_pairing(grid, region, 1.0);
  return OperatorMatrix(grid, SparseMatrix(pairing.entries() / (2.0 * mass)), Hermiticity::hermitian);
}

OperatorMatrix assemble_boundary_K(const Grid1D& grid, const Region& region, Real mass) {
  require_positive_mass(mass);
  const OperatorMatrix commutator = boundary_pairing(grid, region, -1.0);
  return OperatorMatrix(grid, SparseMatrix(kI * commutator.entries() / (2.0 * mass)), Hermiticity::hermitian);
}

OperatorMatrix assemble_restricted_decomposed(const Grid1D& grid, const Region& region, const Potential& potential,
                                              Real mass) {
  require_positive_mass(mass);
  if (!(grid == region.grid())) throw ValidationError("grid and region differ");
  if (static_cast<std::size_t>(potential.values.size()) != grid.size()) {
    throw ValidationError("potential size mismatch");
  }
  const OperatorMatrix p = assemble_momentum(grid);
  const OperatorMatrix proj = assemble_projector(region);

  SparseMatrix potential_diag(idx(grid.size()), idx(grid.size()));
  potential_diag.reserve(Eigen::VectorXi::Constant(idx(grid.size()), 1));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    potential_diag.insert(idx(i), idx(i)) = potential.values(idx(i)) * region.complement_mask()(idx(i));
  }

  const SparseMatrix bulk = (p * proj * p).entries() / (2.0 * mass) + potential_diag;
  const SparseMatrix k_term = assemble_boundary_K(grid, region, mass).entries();
  const SparseMatrix n_dec = assemble_boundary_J(grid, region, mass).entries();
  SparseMatrix total = bulk + 0.5 * k_term - 0.5 * kI * n_dec;
  return OperatorMatrix(grid, std::move(total), Hermiticity::general);
}

OperatorMatrix flux_operator(const OperatorMatrix& hbar) {
  SparseMatrix n = kI * (hbar.entries() - SparseMatrix(hbar.entries().adjoint()));
  return OperatorMatrix(hbar.grid(), std::move(n), Hermiticity::hermitian);
}

Real adjoint_identity_residual(const OperatorMatrix& hbar, const OperatorMatrix& flux) {
  require_same_grid(hbar, flux);
  const SparseMatrix r = SparseMatrix(hbar.entries().adjoint()) - hbar.entries() - kI * flux.entries();
  Real worst = 0.0;
  for (Eigen::Index k = 0; k < r.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(r, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

OperatorMatrix hermitian_part(const OperatorMatrix& m) {
  SparseMatrix h = 0.5 * (m.entries() + SparseMatrix(m.entries().adjoint()));
  return OperatorMatrix(m.grid(), std::move(h), Hermiticity::hermitian);
}

OperatorMatrix antihermitian_part(const OperatorMatrix& m) {
  SparseMatrix a = 0.5 * (m.entries() - SparseMatrix(m.entries().adjoint()));
  return OperatorMatrix(m.grid(), std::move(a), Hermiticity::anti_hermitian);
}

Real max_abs(const OperatorMatrix& m) {
  Real worst = 0.0;
  const SparseMatrix& e = m.entries();
  for (Eigen::Index k = 0; k < e.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(e, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

Real max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_grid(a, b);
  return max_abs(OperatorMatrix(a.grid(), a.entries() - b.entries(), Hermiticity::general));
}

Real hermiticity_defect(const OperatorMatrix& m) { return max_abs_difference(m, m.adjoint()); }

std::vector<std::size_t> support_indices(const OperatorMatrix& m, Real tol) {
  std::set<std::size_t> touched;
  const SparseMatrix& e = m.entries();
  for (Eigen::Index k = 0; k < e.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(e, k); it; ++it) {
      if (std::abs(it.value()) > tol) {
        touched.insert(static_cast<std::size_t>(it.row()));
        touched.insert(static_cast<std::size_t>(it.col()));
      }
    }
  }
  return {touched.begin(), touched.end()};
}

bool localized_at_boundary(const std::vector<std::size_t>& support, const Region& region, std::size_t width) {
  return std::all_of(support.begin(), support.end(), [&](std::size_t i) {
    return std::any_of(region.boundary().begin(), region.boundary().end(), [&](const BoundaryPoint& b) {
      const std::size_t d = i > b.index ? i - b.index : b.index - i;
      return d <= width;
    });
  });
}

Real spectrum_estimate(const Grid1D& grid, const Potential& potential, Real mass) {
  require_positive_mass(mass);
  return 2.0 / (mass * grid.dx() * grid.dx()) + std::max(0.0, potential.max());
}

}  // namespace qarrival
