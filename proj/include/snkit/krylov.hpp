#ifndef SNKIT_KRYLOV_HPP
#define SNKIT_KRYLOV_HPP

#include <functional>
#include <span>

#include "snkit/sparse.hpp"

namespace snkit {

/// y = op(x); x and y never alias.
using OperatorAction = std::function<void(std::span<const double>, std::span<double>)>;

struct KrylovConfig {
  std::size_t restart = 30;
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  bool flexible = true;
};

struct SolveReport {
  std::size_t iterations = 0;
  double final_rel_residual = 0.0;
  bool converged = false;
  bool breakdown = false;
  Vector residual_history;  // absolute norms, length iterations+1
};

/// Restarted GMRES(m), right-preconditioned, so residual estimates track the
/// true residual of the original system. With cfg.flexible the preconditioned
/// vectors are stored per iteration (FGMRES) and apply_m may vary between
/// calls. apply_m == nullptr means no preconditioning. Starts from x = 0.
std::pair<Vector, SolveReport> gmres(const OperatorAction& apply_a,
                                     const OperatorAction& apply_m,
                                     std::span<const double> b,
                                     const KrylovConfig& cfg);

/// Wraps a CSR matrix as an operator action.
OperatorAction csr_operator(const SparseMatrixCSR& a);

} // namespace snkit

#endif
