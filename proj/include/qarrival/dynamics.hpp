#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "qarrival/grid.hpp"
#include "qarrival/operators.hpp"
#include "qarrival/states.hpp"

namespace qarrival {

enum class Scheme { crank_nicolson, exact_eigen };

struct PropagatorConfig {
  Real dt = 0.005;
  std::size_t n_steps = 3000;
  std::size_t record_every = 5;
  Scheme scheme = Scheme::crank_nicolson;
  bool record_states = false;
  // Abort when max edge |psi| exceeds this fraction of the current norm.
  Real edge_tolerance = 1e-6;
};

// What to measure on each recorded state.
struct Probe {
  Region region;
  Real mass = 1.0;
};

struct Trajectory {
  Grid1D grid;
  std::optional<Probe> probe;
  WaveFunction initial;
  // True when the generator is hermitian: survival is measured with region
  // quadrature. Otherwise survival is the plain norm of the restricted state.
  bool unitary = true;

  std::vector<Real> times;
  std::vector<WaveFunction> states;  // empty unless requested
  std::vector<Real> norm2;
  std::vector<Real> survival;
  std::vector<Real> flux;
  std::vector<Real> edge_amplitude;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
};

// One factorization of (I + i dt/2 M) reused for every step.
class CrankNicolson {
 public:
  CrankNicolson(const OperatorMatrix& generator, Real dt);

  void step(ComplexVector& psi) const;
  void step(WaveFunction& psi) const { step(psi.amplitudes()); }
  Real dt() const { return dt_; }

 private:
  SparseMatrix explicit_half_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> implicit_half_;
  Real dt_;
};

Trajectory evolve(const OperatorMatrix& generator, const WaveFunction& psi0, const PropagatorConfig& cfg,
                  const std::optional<Probe>& probe = std::nullopt);

inline constexpr std::size_t kExactSizeLimit = 256;

// psi(t) = exp(-i M t) psi0 by dense decomposition (spectral for hermitian M,
// scaling-and-squaring Padé otherwise).
Trajectory evolve_exact_small(const OperatorMatrix& generator, const WaveFunction& psi0,
                              const std::vector<Real>& times, const std::optional<Probe>& probe = std::nullopt);

// exp(-i M t) as a dense matrix, n <= kExactSizeLimit.
DenseMatrix exact_propagator(const OperatorMatrix& generator, Real t);

struct SemigroupReport {
  std::vector<Real> times;
  std::vector<Real> norm_ratio;
  // max over pairs (t, s), drawn from at most 8 of the times, of |exp(-iM(t+s))psi - exp(-iMt)exp(-iMs)psi|
  Real composition_residual = 0.0;
  // times at which the ratio exceeded its predecessor (contraction violated)
  std::vector<Real> contraction_violations;
};

SemigroupReport semigroup_diagnostic(const OperatorMatrix& hbar, const WaveFunction& psi_in_complement,
                                     const std::vector<Real>& times);

// Per-step CN norm/flux balance: (|psi^{n+1}|^2 - |psi^n|^2)/dt + <psī|N|psī>,
// psī the CN midpoint state and N = i(M - M†).
std::vector<Real> norm_flux_step_residuals(const OperatorMatrix& generator, const WaveFunction& psi0, Real dt,
                                           std::size_t n_steps);

// CSV: t,norm2,Pbar,flux,edge_amp with 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace qarrival
