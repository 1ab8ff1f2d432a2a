#include "qarrival/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qarrival/csv.hpp"
#include "qarrival/errors.hpp"
#include "qarrival/observables.hpp"

namespace qarrival {

namespace {

SparseMatrix identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

// Gershgorin bound on the spectral radius.
Real row_sum_bound(const OperatorMatrix& m) {
  const SparseMatrix& e = m.entries();
  RealVector sums = RealVector::Zero(e.rows());
  for (Eigen::Index k = 0; k < e.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(e, k); it; ++it) sums(it.row()) += std::abs(it.value());
  }
  return sums.maxCoeff();
}

bool numerically_hermitian(const OperatorMatrix& m) {
  return hermiticity_defect(m) <= 1e-12 * std::max(1.0, max_abs(m));
}

void validate(const OperatorMatrix& generator, const WaveFunction& psi0, const std::optional<Probe>& probe) {
  if (!(psi0.grid() == generator.grid())) throw ValidationError("initial state is not on the operator's grid");
  if (probe) {
    if (!(probe->region.grid() == generator.grid())) throw ValidationError("probe region is on a different grid");
    if (!(probe->mass > 0.0)) throw ValidationError("probe mass must be positive");
  }
}

class Recorder {
 public:
  Recorder(Trajectory& out, bool keep_states, Real edge_tolerance)
      : out_(out), keep_states_(keep_states), edge_tolerance_(edge_tolerance) {}

  void check_edges(const WaveFunction& psi, Real t) const {
    const Real edge = psi.edge_amplitude();
    const Real norm = std::sqrt(psi.norm2());
    if (edge > edge_tolerance_ * norm) {
      throw EdgeContamination("edge amplitude " + csv::format(edge) + " exceeds " + csv::format(edge_tolerance_) +
                              " of the norm at t = " + csv::format(t));
    }
  }

  void record(const WaveFunction& psi, Real t) {
    check_edges(psi, t);
    const Real n2 = psi.norm2();
    out_.times.push_back(t);
    out_.norm2.push_back(n2);
    out_.edge_amplitude.push_back(psi.edge_amplitude());
    if (out_.probe) {
      out_.survival.push_back(out_.unitary ? region_probability(psi, out_.probe->region).survival : n2);
      out_.flux.push_back(boundary_flux(psi, out_.probe->region, out_.probe->mass));
    } else {
      out_.survival.push_back(std::nan(""));
      out_.flux.push_back(std::nan(""));
    }
    if (keep_states_) out_.states.push_back(psi);
  }

 private:
  Trajectory& out_;
  bool keep_states_;
  Real edge_tolerance_;
};

Trajectory start(const OperatorMatrix& generator, const WaveFunction& psi0, const std::optional<Probe>& probe) {
  Trajectory t;
  t.grid = generator.grid();
  t.probe = probe;
  t.initial = psi0;
  t.unitary = generator.hermiticity() == Hermiticity::hermitian;
  return t;
}

// exp(-i M t) applied through a cached eigendecomposition when M is hermitian.
class ExactPropagator {
 public:
  explicit ExactPropagator(const OperatorMatrix& generator) : generator_(generator) {
    if (generator.size() > kExactSizeLimit) {
      throw ValidationError("exact propagation limited to n <= " + std::to_string(kExactSizeLimit));
    }
    hermitian_ = numerically_hermitian(generator);
    if (hermitian_) {
      const DenseMatrix dense = hermitian_part(generator).dense();
      Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(dense);
      if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
      eigenvalues_ = solver.eigenvalues();
      eigenvectors_ = solver.eigenvectors();
    }
  }

  DenseMatrix matrix(Real t) const {
    if (hermitian_) {
      const ComplexVector phases = (-kI * t * eigenvalues_.cast<Complex>()).array().exp();
      return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
    }
    const DenseMatrix a = (-kI * t) * generator_.dense();
    return a.exp();
  }

  ComplexVector apply(const ComplexVector& psi0, Real t) const {
    if (hermitian_) {
      const ComplexVector coeffs = eigenvectors_.adjoint() * psi0;
      const ComplexVector phases = (-kI * t * eigenvalues_.cast<Complex>()).array().exp();
      return eigenvectors_ * phases.cwiseProduct(coeffs);
    }
    return matrix(t) * psi0;
  }

 private:
  const OperatorMatrix& generator_;
  bool hermitian_ = false;
  RealVector eigenvalues_;
  DenseMatrix eigenvectors_;
};

}  // namespace

CrankNicolson::CrankNicolson(const OperatorMatrix& generator, Real dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(generator.size());
  const Complex half = 0.5 * dt * kI;
  explicit_half_ = identity(n) - half * generator.entries();
  SparseMatrix implicit = identity(n) + half * generator.entries();
  implicit.makeCompressed();
  implicit_half_.analyzePattern(implicit);
  implicit_half_.factorize(implicit);
  if (implicit_half_.info() != Eigen::Success) {
    throw NumericalError("Crank-Nicolson system is singular for dt = " + csv::format(dt));
  }
}

void CrankNicolson::step(ComplexVector& psi) const {
  const ComplexVector rhs = explicit_half_ * psi;
  psi = implicit_half_.solve(rhs);
  if (implicit_half_.info() != Eigen::Success) throw NumericalError("Crank-Nicolson solve failed");
}

Trajectory evolve(const OperatorMatrix& generator, const WaveFunction& psi0, const PropagatorConfig& cfg,
                  const std::optional<Probe>& probe) {
  validate(generator, psi0, probe);
  if (!(cfg.dt > 0.0)) throw ValidationError("time step must be positive");
  if (cfg.record_every == 0) throw ValidationError("record_every must be at least 1");

  Trajectory out = start(generator, psi0, probe);
  const Real e_max = row_sum_bound(generator);
  if (cfg.dt * e_max > 1.0) {
    out.warnings.push_back("dt * E_max = " + csv::format(cfg.dt * e_max) +
                           " > 1; Crank-Nicolson stays stable but high-energy phases are inaccurate");
  }

  Recorder recorder(out, cfg.record_states, cfg.edge_tolerance);
  recorder.record(psi0, 0.0);

  if (cfg.scheme == Scheme::crank_nicolson) {
    const CrankNicolson stepper(generator, cfg.dt);
    WaveFunction psi = psi0;
    for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
      stepper.step(psi);
      const Real t = static_cast<Real>(step) * cfg.dt;
      if (step % cfg.record_every == 0) {
        recorder.record(psi, t);
      } else {
        recorder.check_edges(psi, t);
      }
    }
  } else {
    const ExactPropagator exact(generator);
    for (std::size_t step = cfg.record_every; step <= cfg.n_steps; step += cfg.record_every) {
      const Real t = static_cast<Real>(step) * cfg.dt;
      recorder.record(WaveFunction(psi0.grid(), exact.apply(psi0.amplitudes(), t)), t);
    }
  }
  return out;
}

Trajectory evolve_exact_small(const OperatorMatrix& generator, const WaveFunction& psi0,
                              const std::vector<Real>& times, const std::optional<Probe>& probe) {
  validate(generator, psi0, probe);
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end()) {
    throw ValidationError("times must be strictly increasing");
  }
  const ExactPropagator exact(generator);
  Trajectory out = start(generator, psi0, probe);
  out.unitary = numerically_hermitian(generator);
  Recorder recorder(out, true, 1.0);
  for (Real t : times) recorder.record(WaveFunction(psi0.grid(), exact.apply(psi0.amplitudes(), t)), t);
  return out;
}

DenseMatrix exact_propagator(const OperatorMatrix& generator, Real t) { return ExactPropagator(generator).matrix(t); }

SemigroupReport semigroup_diagnostic(const OperatorMatrix& hbar, const WaveFunction& psi_in_complement,
                                     const std::vector<Real>& times) {
  if (!(psi_in_complement.grid() == hbar.grid())) throw ValidationError("state is not on the operator's grid");
  const ExactPropagator exact(hbar);
  const ComplexVector& psi = psi_in_complement.amplitudes();
  const Real norm0 = psi.norm();
  if (!(norm0 > 0.0)) throw ValidationError("semigroup diagnostic needs a nonzero state");

  SemigroupReport report;
  std::vector<ComplexVector> evolved;
  for (Real t : times) {
    evolved.push_back(exact.apply(psi, t));
    report.times.push_back(t);
    report.norm_ratio.push_back(evolved.back().norm() / norm0);
    const std::size_t k = report.norm_ratio.size();
    const bool grew = k > 1 ? report.norm_ratio[k - 1] > report.norm_ratio[k - 2] * (1.0 + 1e-12)
                            : report.norm_ratio[0] > 1.0 + 1e-12;
    if (grew) report.contraction_violations.push_back(t);
  }
  // composition on a subsample of at most 8 times; each pair costs a dense exponential
  const std::size_t stride = std::max<std::size_t>(1, (times.size() + 7) / 8);
  for (std::size_t i = 0; i < times.size(); i += stride) {
    const DenseMatrix u_t = exact.matrix(times[i]);
    for (std::size_t j = i; j < times.size(); j += stride) {
      const ComplexVector composed = u_t * evolved[j];
      const ComplexVector direct = exact.apply(psi, times[i] + times[j]);
      report.composition_residual =
          std::max(report.composition_residual, (direct - composed).norm() * std::sqrt(hbar.grid().dx()));
    }
  }
  return report;
}

std::vector<Real> norm_flux_step_residuals(const OperatorMatrix& generator, const WaveFunction& psi0, Real dt,
                                           std::size_t n_steps) {
  if (!(psi0.grid() == generator.grid())) throw ValidationError("initial state is not on the operator's grid");
  const CrankNicolson stepper(generator, dt);
  const OperatorMatrix n_op = flux_operator(generator);
  std::vector<Real> residuals;
  residuals.reserve(n_steps);
  WaveFunction psi = psi0;
  for (std::size_t s = 0; s < n_steps; ++s) {
    WaveFunction next = psi;
    stepper.step(next);
    const WaveFunction mid(psi.grid(), 0.5 * (psi.amplitudes() + next.amplitudes()));
    residuals.push_back((next.norm2() - psi.norm2()) / dt + n_op.expectation(mid).real());
    psi = std::move(next);
  }
  return residuals;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  csv::write_row(out, {"t", "norm2", "Pbar", "flux", "edge_amp"});
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    csv::write_row(out, {trajectory.times[i], trajectory.norm2[i], trajectory.survival[i], trajectory.flux[i],
                         trajectory.edge_amplitude[i]});
  }
}

}  // namespace qarrival
