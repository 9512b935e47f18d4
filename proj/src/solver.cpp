#include "snkit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

// Inner solve of D z = w, recording the iteration count in the handle log.
Vector inner_solve(const PreconditionerHandle& handle, const Vector& w) {
  if (handle.spec.inner == InnerSolver::Direct) {
    handle.inner_iterations_log.push_back(0);
    return lu_solve(*handle.direct, w);
  }
  KrylovConfig cfg;
  cfg.restart = 30;
  cfg.max_iters = handle.spec.inner_max_amg;
  cfg.rel_tol = handle.spec.inner_tol;
  cfg.flexible = true;
  const AmgHierarchy& hierarchy = *handle.amg;
  OperatorAction precond = [&hierarchy](std::span<const double> x, std::span<double> y) {
    const Vector v = amg_apply(hierarchy, x);
    std::copy(v.begin(), v.end(), y.begin());
  };
  auto [z, rep] = gmres(csr_operator(handle.dsa->matrix), precond, w, cfg);
  handle.inner_iterations_log.push_back(rep.iterations);
  if (!rep.converged) ++handle.inner_nonconverged;  // reported, not fatal
  return z;
}

} // namespace

PreconditionerHandle build_preconditioner(const TransportSystem& sys,
                                          const PreconditionerSpec& spec) {
  PreconditionerHandle handle;
  handle.spec = spec;
  const std::size_t dofs_per_elem = sys.space.dofs_per_element();

  const bool het = spec.variant == PreconditionerVariant::HetDsaDiag ||
                   spec.variant == PreconditionerVariant::HetDsaTri;
  if (het && (std::isnan(spec.eta) || spec.eta < 0.0))
    throw UsageError("build_preconditioner: heterogeneous variants need eta >= 0");

  if (spec.variant == PreconditionerVariant::None) {
    handle.partition = partition_thick(sys.field, std::numeric_limits<double>::infinity(),
                                       dofs_per_elem);
    return handle;
  }

  if (het) {
    handle.partition = partition_thick(sys.field, spec.eta, dofs_per_elem);
    if (handle.partition.thick_elements.empty()) return handle;  // identity application
    handle.dsa = assemble_dsa(sys, spec.kind, DsaScope::ThickOnly, spec.eta);
  } else {
    handle.partition = partition_thick(sys.field, 0.0, dofs_per_elem);
    handle.dsa = assemble_dsa(sys, spec.kind, DsaScope::Full, spec.eta);
  }

  const SparseMatrixCSR& mass =
      spec.additive_mass == AdditiveMass::SigmaT ? sys.sigma_t_mass : sys.scatter_mass;
  handle.sigma_mass_scope =
      handle.dsa->dof_map.size() == sys.n_dofs()
          ? mass
          : extract_principal_submatrix(mass, handle.dsa->dof_map);

  if (spec.inner == InnerSolver::Direct) {
    handle.direct = lu_factor(csr_to_dense(handle.dsa->matrix));
  } else {
    AmgConfig amg_cfg;
    amg_cfg.smoother = AmgSmoother::HybridGaussSeidelL1;
    handle.amg = amg_setup(handle.dsa->matrix, amg_cfg);
  }
  return handle;
}

Vector apply_het_diag(const PreconditionerHandle& handle, std::span<const double> phi) {
  Vector out(phi.begin(), phi.end());
  if (!handle.dsa) return out;  // all-thin partition: identity
  const std::vector<std::size_t>& map = handle.dsa->dof_map;

  Vector phi_f(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) phi_f[k] = phi[map[k]];
  const Vector w = spmv(handle.sigma_mass_scope, phi_f);
  const Vector z = inner_solve(handle, w);
  for (std::size_t k = 0; k < map.size(); ++k) out[map[k]] += z[k];
  return out;
}

Vector apply_het_tri(const PreconditionerHandle& handle, const TransportSystem& sys,
                     std::span<const double> phi) {
  Vector out = apply_het_diag(handle, phi);
  if (!handle.dsa) return out;
  const std::vector<std::size_t>& map = handle.dsa->dof_map;
  if (map.size() == sys.n_dofs()) return out;  // no thin entries to update

  // phi_bar = (0, phi_f) with the step-1 thick values; one transport update
  // accumulated into thin entries only.
  Vector phi_bar(sys.n_dofs(), 0.0);
  for (const std::size_t g : map) phi_bar[g] = out[g];
  const Vector scattered = spmv(sys.scatter_mass, phi_bar);

  std::vector<char> is_thick(sys.n_dofs(), 0);
  for (const std::size_t g : map) is_thick[g] = 1;
  for (std::size_t d = 0; d < sys.quad.size(); ++d) {
    const Vector psi = sweep_solve(sys, d, scattered);
    const double w = sys.quad.weights[d];
    for (std::size_t g = 0; g < sys.n_dofs(); ++g)
      if (!is_thick[g]) out[g] += w * psi[g];
  }
  return out;
}

Vector apply_preconditioner(const PreconditionerHandle& handle, const TransportSystem& sys,
                            std::span<const double> phi) {
  switch (handle.spec.variant) {
    case PreconditionerVariant::None: {
      return Vector(phi.begin(), phi.end());
    }
    case PreconditionerVariant::FullDsa: {
      Vector out(phi.begin(), phi.end());
      const Vector w = spmv(handle.sigma_mass_scope, phi);
      const Vector z = inner_solve(handle, w);
      axpy(1.0, z, out);
      return out;
    }
    case PreconditionerVariant::HetDsaDiag:
      return apply_het_diag(handle, phi);
    case PreconditionerVariant::HetDsaTri:
      return apply_het_tri(handle, sys, phi);
  }
  throw UsageError("apply_preconditioner: unknown variant");
}

std::pair<Vector, TransportRunStats> solve_transport(const TransportSystem& sys,
                                                     const PreconditionerSpec& spec,
                                                     const KrylovConfig& outer_cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  PreconditionerHandle handle = build_preconditioner(sys, spec);

  const Vector b = schur_rhs(sys);
  OperatorAction apply_a = [&sys](std::span<const double> x, std::span<double> y) {
    const Vector v = schur_apply(sys, x);
    std::copy(v.begin(), v.end(), y.begin());
  };
  OperatorAction apply_m = [&handle, &sys](std::span<const double> x, std::span<double> y) {
    const Vector v = apply_preconditioner(handle, sys, x);
    std::copy(v.begin(), v.end(), y.begin());
  };

  auto [phi, rep] = gmres(apply_a, apply_m, b, outer_cfg);

  TransportRunStats stats;
  stats.outer_iterations = rep.iterations;
  stats.outer_residual_history = rep.residual_history;
  stats.converged = rep.converged;
  stats.n_dofs = sys.n_dofs();
  stats.thick_dof_fraction = handle.partition.thick_element_fraction;
  stats.inner_amg_iterations_per_outer = handle.inner_iterations_log;
  stats.inner_amg_iterations_per_outer.resize(rep.iterations, 0);
  stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(phi), std::move(stats)};
}

Vector recover_angular_flux(const TransportSystem& sys, std::span<const double> phi,
                            std::size_t d) {
  Vector rhs = ordinate_rhs(sys, d);
  const Vector scattered = spmv(sys.scatter_mass, phi);
  axpy(1.0, scattered, rhs);
  return sweep_solve(sys, d, rhs);
}

std::pair<Vector, TransportRunStats> fixed_point_solve(const TransportSystem& sys,
                                                       const PreconditionerSpec& spec,
                                                       double rel_tol, std::size_t max_iters) {
  const auto t0 = std::chrono::steady_clock::now();
  PreconditionerHandle handle = build_preconditioner(sys, spec);
  const Vector b = schur_rhs(sys);
  const double bnorm = norm2(b);

  TransportRunStats stats;
  stats.n_dofs = sys.n_dofs();
  stats.thick_dof_fraction = handle.partition.thick_element_fraction;

  Vector phi(sys.n_dofs(), 0.0);
  Vector residual = b;
  double rnorm = bnorm;
  stats.outer_residual_history.push_back(rnorm);
  while (stats.outer_iterations < max_iters && rnorm > rel_tol * bnorm) {
    const Vector update = apply_preconditioner(handle, sys, residual);
    axpy(1.0, update, phi);
    const Vector s_phi = schur_apply(sys, phi);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = b[i] - s_phi[i];
    rnorm = norm2(residual);
    ++stats.outer_iterations;
    stats.outer_residual_history.push_back(rnorm);
  }
  stats.converged = rnorm <= rel_tol * bnorm;
  stats.inner_amg_iterations_per_outer = handle.inner_iterations_log;
  stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(phi), std::move(stats)};
}

} // namespace snkit
