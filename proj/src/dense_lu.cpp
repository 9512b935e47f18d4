#include "snkit/dense_lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "snkit/errors.hpp"

namespace snkit {

LUFactors lu_factor(DenseMatrix a) {
  if (a.n_rows != a.n_cols) throw UsageError("lu_factor: matrix not square");
  const std::size_t n = a.n_rows;
  LUFactors f;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  double max_abs = 0.0;
  for (const double v : a.values) max_abs = std::max(max_abs, std::abs(v));
  const double near_tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_abs;

  double* m = a.values.data();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(m[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(m[i * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0)
      throw SingularMatrixError("lu_factor: exact zero pivot in column " + std::to_string(k));
    if (best <= near_tol) f.near_singular = true;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      std::swap(f.perm[k], f.perm[piv]);
    }
    const double pivot = m[k * n + k];
    const double* uk = m + k * n;
    for (std::size_t i = k + 1; i < n; ++i) {
      double* ri = m + i * n;
      const double l = ri[k] / pivot;
      ri[k] = l;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * uk[j];
    }
  }
  f.lu = std::move(a);
  return f;
}

void lu_solve_inplace(const LUFactors& f, std::span<double> x) {
  const std::size_t n = f.lu.n_rows;
  if (x.size() != n) throw UsageError("lu_solve: vector length mismatch");
  const double* m = f.lu.values.data();

  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[f.perm[i]];
  // L y' = y (unit diagonal)
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    const double* ri = m + i * n;
    for (std::size_t j = 0; j < i; ++j) s -= ri[j] * y[j];
    y[i] = s;
  }
  // U x = y'
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    const double* ri = m + ii * n;
    for (std::size_t j = ii + 1; j < n; ++j) s -= ri[j] * y[j];
    y[ii] = s / ri[ii];
  }
  std::copy(y.begin(), y.end(), x.begin());
}

Vector lu_solve(const LUFactors& f, std::span<const double> b) {
  Vector x(b.begin(), b.end());
  lu_solve_inplace(f, x);
  return x;
}

} // namespace snkit
