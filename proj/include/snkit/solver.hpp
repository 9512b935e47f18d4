#ifndef SNKIT_SOLVER_HPP
#define SNKIT_SOLVER_HPP

#include <memory>
#include <optional>

#include "snkit/amg.hpp"
#include "snkit/dg.hpp"
#include "snkit/krylov.hpp"

namespace snkit {

enum class PreconditionerVariant { None, FullDsa, HetDsaDiag, HetDsaTri };
enum class InnerSolver { Direct, AmgFgmres };
enum class AdditiveMass { SigmaT, SigmaS };

struct PreconditionerSpec {
  PreconditionerVariant variant = PreconditionerVariant::FullDsa;
  DsaKind kind = DsaKind::NIP;
  double eta = 1.0;
  InnerSolver inner = InnerSolver::Direct;
  double inner_tol = 1e-4;
  std::size_t inner_max_amg = 250;
  // The additive form is I + D^-1 Sigma; Sigma defaults to the sigma_t mass
  // matrix, with the sigma_s variant available for experimentation.
  AdditiveMass additive_mass = AdditiveMass::SigmaT;
};

/// Built preconditioner state: assembled DSA operator at the requested scope,
/// its factorization or AMG hierarchy, and the thick-DOF map. Application
/// records inner iteration counts (one entry per application).
struct PreconditionerHandle {
  PreconditionerSpec spec;
  ThickPartition partition;
  std::optional<DsaMatrix> dsa;
  SparseMatrixCSR sigma_mass_scope;
  std::optional<LUFactors> direct;
  std::optional<AmgHierarchy> amg;
  mutable std::vector<std::size_t> inner_iterations_log;
  mutable std::size_t inner_nonconverged = 0;
};

struct TransportRunStats {
  std::size_t outer_iterations = 0;
  Vector outer_residual_history;
  std::vector<std::size_t> inner_amg_iterations_per_outer;
  double thick_dof_fraction = 0.0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  std::size_t n_dofs = 0;
};

PreconditionerHandle build_preconditioner(const TransportSystem& sys,
                                          const PreconditionerSpec& spec);

/// Block-diagonal heterogeneous application: thin entries pass through,
/// thick entries receive phi_f + D_ff^-1 Sigma_f phi_f.
Vector apply_het_diag(const PreconditionerHandle& handle, std::span<const double> phi);

/// Block-triangular heterogeneous application: the diagonal update followed
/// by one transport update of the thin entries driven by the updated thick
/// values (phi_bar = (0, phi_f)).
Vector apply_het_tri(const PreconditionerHandle& handle, const TransportSystem& sys,
                     std::span<const double> phi);

/// Dispatches on the handle's variant (identity / full / het-diag / het-tri).
Vector apply_preconditioner(const PreconditionerHandle& handle, const TransportSystem& sys,
                            std::span<const double> phi);

/// Solves S phi = b with right-preconditioned flexible GMRES from a zero
/// initial guess; S is applied matrix-free (one sweep per ordinate).
std::pair<Vector, TransportRunStats> solve_transport(const TransportSystem& sys,
                                                     const PreconditionerSpec& spec,
                                                     const KrylovConfig& outer_cfg);

/// psi_d = L_d^-1 (q_d + Sigma_s phi), one sweep.
Vector recover_angular_flux(const TransportSystem& sys, std::span<const double> phi,
                            std::size_t d);

/// Diagnostic unaccelerated (Richardson) iteration on the preconditioned
/// fixed point; the Krylov path above is the production solver.
std::pair<Vector, TransportRunStats> fixed_point_solve(const TransportSystem& sys,
                                                       const PreconditionerSpec& spec,
                                                       double rel_tol, std::size_t max_iters);

} // namespace snkit

#endif
