#ifndef SNKIT_AMG_HPP
#define SNKIT_AMG_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snkit/dense_lu.hpp"
#include "snkit/sparse.hpp"

namespace snkit {

enum class AmgSmoother { WeightedJacobi, HybridGaussSeidelL1 };

struct AmgConfig {
  double strength_threshold = 0.05;
  std::size_t max_levels = 20;
  std::size_t min_coarse_size = 16;
  std::size_t pre_sweeps = 1;
  std::size_t post_sweeps = 1;
  AmgSmoother smoother = AmgSmoother::WeightedJacobi;
};

struct AmgLevel {
  SparseMatrixCSR a;
  SparseMatrixCSR p;       // prolongation (empty on the coarsest level)
  SparseMatrixCSR r;       // restriction, r = p^T
  Vector smoother_diag;    // l1 diagonal (Jacobi) or plain diagonal (GS)
};

struct AmgHierarchy {
  AmgConfig config;
  std::vector<AmgLevel> levels;  // levels.back() is the coarsest
  LUFactors coarse_lu;

  std::size_t n_levels() const { return levels.size(); }
};

/// Builds a classical multigrid hierarchy: strength of connection on the
/// symmetrized magnitude pattern (|A| + |A^T|)/2, Ruge-Stuben first-pass
/// coarsening, direct interpolation, Galerkin coarse operators with R = P^T,
/// dense LU on the coarsest level. Throws AmgSetupError on a zero diagonal
/// row (naming the row).
AmgHierarchy amg_setup(const SparseMatrixCSR& a, const AmgConfig& cfg);

/// One V(pre, post)-cycle applied to residual r from the zero initial guess.
/// Linear and deterministic in r.
Vector amg_apply(const AmgHierarchy& h, std::span<const double> r);

/// One smoothing step on a level, in place (Jacobi ignores `forward`).
void amg_smooth_once(const AmgHierarchy& h, std::size_t level, Vector& x,
                     std::span<const double> rhs, bool forward);

/// Per-level sizes and operator complexity as a JSON string, for diagnostics.
std::string amg_diagnostics_json(const AmgHierarchy& h);

} // namespace snkit

#endif
