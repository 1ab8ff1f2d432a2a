#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "qarrival/csv.hpp"
#include "qarrival/errors.hpp"
#include "qarrival/observables.hpp"
#include "qarrival/pipeline.hpp"

namespace qarrival {

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.passed) return c.name;
  }
  return {};
}

void VerifyReport::write(std::ostream& out) const {
  for (const auto& c : checks) {
    const char* status = c.relation == "report" ? "INFO" : (c.passed ? "PASS" : "FAIL");
    out << status << ' ' << c.name << " value=" << csv::format(c.value);
    if (c.relation != "report") out << ' ' << c.relation << ' ' << csv::format(c.threshold);
    out << '\n';
  }
  out << (all_passed() ? "RESULT PASS\n" : "RESULT FAIL " + first_failure() + "\n");
}

namespace {

class Checks {
 public:
  void at_most(std::string name, Real value, Real threshold) {
    report_.checks.push_back({std::move(name), value, threshold, "<=", value <= threshold});
  }
  void above(std::string name, Real value, Real threshold) {
    report_.checks.push_back({std::move(name), value, threshold, ">", value > threshold});
  }
  void info(std::string name, Real value) { report_.checks.push_back({std::move(name), value, 0.0, "report", true}); }
  VerifyReport take() { return std::move(report_); }

 private:
  VerifyReport report_;
};

Real rel(const OperatorMatrix& m) { return std::max(1.0, max_abs(m)); }

Real max_abs_dense(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

WaveFunction plane_wave(const Grid1D& grid, Real k) {
  ComplexVector a(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) a(static_cast<Eigen::Index>(i)) = std::polar(1.0, k * grid.x(i));
  return WaveFunction(grid, std::move(a));
}

// Boundary location of the first surface point.
Real surface_position(const Region& region) { return region.grid().x(region.boundary().front().index); }

struct WeakGaps {
  Real decomposed_vs_direct = 0.0;
  Real adjoint_cross = 0.0;
};

// Weak-sense gaps for a smooth packet straddling the surface on a grid with n points.
WeakGaps weak_gaps(const SimulationConfig& config, std::size_t n) {
  SimulationConfig c = config;
  c.grid_n = n;
  const Grid1D grid = build_grid(c);
  const Region region = build_region(c);
  const Potential potential = build_potential(c);
  // Off-centre so that the symmetric parts of the two stencils do not cancel.
  const Real sigma = std::max(c.packet_sigma, 8.0 * build_grid(config).dx());
  const FreeGaussian packet(surface_position(region) - 0.5 * sigma, sigma, c.packet_k0, c.mass);
  WaveFunction psi = packet.sample(grid, 0.0);
  psi.normalize();

  const OperatorMatrix h = assemble_full(grid, potential, c.mass);
  const OperatorMatrix direct = assemble_restricted_direct(h, region);
  const OperatorMatrix decomposed = assemble_restricted_decomposed(grid, region, potential, c.mass);
  const OperatorMatrix n_dec = assemble_boundary_J(grid, region, c.mass);
  const OperatorMatrix cross = direct.adjoint() - direct - kI * n_dec;

  return {std::abs((decomposed - direct).expectation(psi)), std::abs(cross.expectation(psi))};
}

void configured_grid_checks(const SimulationConfig& config, Checks& checks) {
  const Grid1D grid = build_grid(config);
  const Region region = build_region(config);
  const Potential potential = build_potential(config);
  const Real m = config.mass;

  const OperatorMatrix h = assemble_full(grid, potential, m);
  const OperatorMatrix proj = assemble_projector(region);
  const OperatorMatrix p = assemble_momentum(grid);
  const OperatorMatrix k_term = assemble_boundary_K(grid, region, m);
  const OperatorMatrix n_dec = assemble_boundary_J(grid, region, m);
  const OperatorMatrix direct = assemble_restricted_direct(h, region);
  const OperatorMatrix decomposed = assemble_restricted_decomposed(grid, region, potential, m);
  const OperatorMatrix n_direct = flux_operator(direct);
  const OperatorMatrix n_decomposed = flux_operator(decomposed);

  checks.at_most("hermitian.H", hermiticity_defect(h), 1e-12 * rel(h));
  checks.at_most("hermitian.projector", hermiticity_defect(proj), 1e-12 * rel(proj));
  checks.at_most("hermitian.momentum", hermiticity_defect(p), 1e-12 * rel(p));
  checks.at_most("hermitian.K_term", hermiticity_defect(k_term), 1e-12 * rel(k_term));
  checks.at_most("hermitian.N_dec", hermiticity_defect(n_dec), 1e-12 * rel(n_dec));
  checks.at_most("hermitian.N_direct", hermiticity_defect(n_direct), 1e-12 * rel(n_direct));
  checks.at_most("hermitian.N_decomposed", hermiticity_defect(n_decomposed), 1e-12 * rel(n_decomposed));
  checks.above("nonhermitian.Hbar_direct", hermiticity_defect(direct), 0.0);
  checks.above("nonhermitian.Hbar_decomposed", hermiticity_defect(decomposed), 0.0);

  checks.at_most("adjoint.definitional.direct", adjoint_identity_residual(direct, n_direct), 1e-14 * rel(direct));
  checks.at_most("adjoint.definitional.decomposed", adjoint_identity_residual(decomposed, n_decomposed),
                 1e-14 * rel(decomposed));
  checks.at_most("adjoint.decomposed_with_N_dec", adjoint_identity_residual(decomposed, n_dec),
                 1e-12 * rel(decomposed));
  checks.info("adjoint.direct_with_N_dec.entrywise", adjoint_identity_residual(direct, n_dec));

  SparseMatrix potential_part(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    potential_part.insert(ii, ii) = potential.values(ii) * region.complement_mask()(ii);
  }
  const OperatorMatrix bulk = Complex(1.0 / (2.0 * m)) * (p * proj * p) + OperatorMatrix(grid, potential_part, Hermiticity::hermitian) +
                              Complex(0.5) * k_term;
  checks.at_most("decomposition.hermitian_part", max_abs_difference(hermitian_part(decomposed), bulk),
                 1e-12 * rel(decomposed));
  checks.at_most("decomposition.antihermitian_part",
                 max_abs_difference(antihermitian_part(decomposed), Complex(0.0, -0.5) * n_dec),
                 1e-12 * rel(decomposed));

  const auto direct_support = support_indices(n_direct);
  checks.above("locality.direct.nonempty", static_cast<Real>(direct_support.size()), 0.0);
  checks.at_most("locality.direct.outside_boundary", localized_at_boundary(direct_support, region) ? 0.0 : 1.0, 0.0);
  checks.at_most("locality.N_dec.outside_boundary", localized_at_boundary(support_indices(n_dec), region) ? 0.0 : 1.0,
                 0.0);
  checks.at_most("locality.K_term.outside_boundary",
                 localized_at_boundary(support_indices(k_term), region) ? 0.0 : 1.0, 0.0);

  const Real k = config.packet_k0 != 0.0 ? config.packet_k0 : 1.0;
  const WaveFunction wave = plane_wave(grid, k);
  const Real lattice_current = std::sin(k * grid.dx()) / (m * grid.dx());
  Real plane_sum = 0.0;
  for (const auto& b : region.boundary()) plane_sum += b.outward_sign;
  checks.at_most("flux.plane_wave.N_dec", std::abs(n_dec.expectation(wave).real() - plane_sum * lattice_current),
                 1e-10);
  checks.at_most("flux.plane_wave.N_direct",
                 std::abs(n_direct.expectation(wave).real() - plane_sum * lattice_current), 1e-10);

  const FreeGaussian straddle(surface_position(region), std::max(config.packet_sigma, 8.0 * grid.dx()),
                              config.packet_k0, m);
  WaveFunction psi = straddle.sample(grid, 0.0);
  psi.normalize();
  checks.at_most("flux.N_dec_equals_boundary_flux",
                 std::abs(n_dec.expectation(psi).real() - boundary_flux(psi, region, m)), 1e-12);

  const WeakGaps coarse = weak_gaps(config, config.grid_n);
  const WeakGaps fine = weak_gaps(config, 2 * config.grid_n - 1);
  checks.info("weak.decomposed_vs_direct.coarse", coarse.decomposed_vs_direct);
  checks.at_most("weak.decomposed_vs_direct.refined", fine.decomposed_vs_direct, coarse.decomposed_vs_direct);
  checks.info("weak.adjoint_cross.coarse", coarse.adjoint_cross);
  checks.at_most("weak.adjoint_cross.refined", fine.adjoint_cross, coarse.adjoint_cross);
}

void small_grid_checks(const SimulationConfig& config, Checks& checks) {
  const std::size_t n = 64;
  const Real m = config.mass;
  const Grid1D grid = make_grid(-10.0, 10.0, n);
  const Region region = make_region(grid, HalfLineDetector{grid.x(40)});
  const Potential zero = Potential::zero(grid);

  const OperatorMatrix h = assemble_full(grid, zero, m);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h.dense());
  RealVector expected(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k) {
    expected(static_cast<Eigen::Index>(k - 1)) =
        (1.0 - std::cos(static_cast<Real>(k) * std::numbers::pi / static_cast<Real>(n + 1))) / (m * grid.dx() * grid.dx());
  }
  std::sort(expected.begin(), expected.end());
  checks.at_most("small.spectrum", (solver.eigenvalues() - expected).cwiseAbs().maxCoeff(), 1e-10 * expected.maxCoeff());

  const DenseMatrix proj = assemble_projector(region).dense();
  const DenseMatrix hd = h.dense();
  const DenseMatrix pd = assemble_momentum(grid).dense();
  const OperatorMatrix direct = assemble_restricted_direct(h, region);
  const OperatorMatrix decomposed = assemble_restricted_decomposed(grid, region, zero, m);
  checks.at_most("small.dense.direct", max_abs_dense(proj * hd - direct.dense()), 1e-14 * max_abs_dense(hd));

  DenseMatrix boundary_sum = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& b : region.boundary()) {
    DenseMatrix e = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    e(static_cast<Eigen::Index>(b.index), static_cast<Eigen::Index>(b.index)) = 1.0 / grid.dx();
    boundary_sum += static_cast<Real>(b.outward_sign) * (e * pd);
  }
  const DenseMatrix boundary_form = pd * proj * pd / (2.0 * m) - kI / (2.0 * m) * boundary_sum;
  checks.at_most("small.dense.decomposed", max_abs_dense(boundary_form - decomposed.dense()),
                 1e-12 * max_abs_dense(boundary_form));
  const DenseMatrix n_dense = kI * (decomposed.dense() - decomposed.dense().adjoint());
  checks.at_most("small.dense.flux_operator", max_abs_dense(n_dense - flux_operator(decomposed).dense()),
                 1e-14 * std::max(1.0, max_abs_dense(n_dense)));

  // Crank-Nicolson against the dense exponential: second order in dt.
  const Real sigma = 3.0 * grid.dx();
  WaveFunction psi = FreeGaussian(-2.0, sigma, 1.0, m).sample(grid, 0.0);
  psi.normalize();
  const Real t_end = 1.0;
  const ComplexVector exact = exact_propagator(h, t_end) * psi.amplitudes();
  Real errors[2] = {0.0, 0.0};
  const Real steps[2] = {0.02, 0.01};
  for (int i = 0; i < 2; ++i) {
    PropagatorConfig cfg;
    cfg.dt = steps[i];
    cfg.n_steps = static_cast<std::size_t>(std::llround(t_end / steps[i]));
    cfg.record_every = cfg.n_steps;
    cfg.record_states = true;
    const Trajectory tr = evolve(h, psi, cfg);
    errors[i] = (tr.states.back().amplitudes() - exact).cwiseAbs().maxCoeff();
  }
  checks.info("small.cn_vs_exact.error", errors[1]);
  checks.above("small.cn_vs_exact.order", observed_order(errors[0], errors[1]), 1.8);

  WaveFunction inside = restrict(psi, region);
  const SemigroupReport semigroup = semigroup_diagnostic(decomposed, inside, {0.0, 0.25, 0.5, 1.0});
  checks.at_most("small.semigroup.composition", semigroup.composition_residual, 1e-10);
  checks.info("small.semigroup.contraction_violations", static_cast<Real>(semigroup.contraction_violations.size()));
}

}  // namespace

VerifyReport run_verification(const SimulationConfig& config) {
  validate_config(config);
  Checks checks;
  configured_grid_checks(config, checks);
  small_grid_checks(config, checks);
  return checks.take();
}

}  // namespace qarrival
