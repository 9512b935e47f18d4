#ifndef SNKIT_DENSE_LU_HPP
#define SNKIT_DENSE_LU_HPP

#include <span>

#include "snkit/sparse.hpp"

namespace snkit {

/// Dense LU factorization with partial (row) pivoting, P A = L U stored in
/// place. `near_singular` flags pivots at or below working precision of the
/// matrix scale; an exact zero pivot throws SingularMatrixError instead.
struct LUFactors {
  DenseMatrix lu;                  // L (unit lower) and U packed together
  std::vector<std::size_t> perm;   // row permutation
  bool near_singular = false;
};

LUFactors lu_factor(DenseMatrix a);
Vector lu_solve(const LUFactors& f, std::span<const double> b);

/// Convenience: in-place forward/back substitution into x.
void lu_solve_inplace(const LUFactors& f, std::span<double> x);

} // namespace snkit

#endif
