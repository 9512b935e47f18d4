// Test-only dense oracles, independent of the sweep/matrix-free paths they
// are used to check.
#ifndef SNKIT_TESTS_ORACLE_UTILS_HPP
#define SNKIT_TESTS_ORACLE_UTILS_HPP

#include <cmath>
#include <random>

#include "snkit/dense_lu.hpp"
#include "snkit/dg.hpp"
#include "snkit/sparse.hpp"

namespace snkit::oracle {

inline DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.n_rows, b.n_cols);
  for (std::size_t i = 0; i < a.n_rows; ++i)
    for (std::size_t k = 0; k < a.n_cols; ++k) {
      const double av = a(i, k);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.n_cols; ++j) c(i, j) += av * b(k, j);
    }
  return c;
}

inline DenseMatrix dense_inverse(const DenseMatrix& a) {
  const LUFactors f = lu_factor(a);
  const std::size_t n = a.n_rows;
  DenseMatrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const Vector col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

inline Vector dense_apply(const DenseMatrix& a, const Vector& x) {
  Vector y(a.n_rows, 0.0);
  for (std::size_t i = 0; i < a.n_rows; ++i)
    for (std::size_t j = 0; j < a.n_cols; ++j) y[i] += a(i, j) * x[j];
  return y;
}

/// Dense scalar-flux operator I - sum_d w_d L_d^-1 Sigma_s from per-ordinate
/// dense inverses of the assembled transport matrices.
inline DenseMatrix dense_schur(const TransportSystem& sys) {
  const std::size_t n = sys.n_dofs();
  const DenseMatrix scatter = csr_to_dense(sys.scatter_mass);
  DenseMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) s(i, i) = 1.0;
  for (std::size_t d = 0; d < sys.quad.size(); ++d) {
    const DenseMatrix linv = dense_inverse(csr_to_dense(assemble_ordinate_matrix(sys, d)));
    const DenseMatrix term = dense_matmul(linv, scatter);
    const double w = sys.quad.weights[d];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s(i, j) -= w * term(i, j);
  }
  return s;
}

/// Cholesky certificate: returns true iff a + shift*I admits a Cholesky
/// factorization, i.e. lambda_min(a) > -shift for symmetric a.
inline bool cholesky_psd_certificate(DenseMatrix a, double shift) {
  const std::size_t n = a.n_rows;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
  for (std::size_t k = 0; k < n; ++k) {
    double diag = a(k, k);
    for (std::size_t j = 0; j < k; ++j) diag -= a(k, j) * a(k, j);
    if (!(diag > 0.0)) return false;
    const double l = std::sqrt(diag);
    a(k, k) = l;
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = a(i, k);
      for (std::size_t j = 0; j < k; ++j) v -= a(i, j) * a(k, j);
      a(i, k) = v / l;
    }
  }
  return true;
}

inline Vector random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = val(rng);
  return v;
}

/// Small uniform-coefficient problem on an nx x ny mesh.
struct UniformProblem {
  StructuredMesh mesh;
  CoefficientField field;
  BoundarySource bc;
};

inline UniformProblem make_uniform_problem(std::size_t nx, std::size_t ny, double hx, double hy,
                                           double sigma_s, double sigma_a, double psi_inc,
                                           double q) {
  UniformProblem u;
  u.mesh.nx = nx;
  u.mesh.ny = ny;
  u.mesh.hx = hx;
  u.mesh.hy = hy;
  const std::size_t n = nx * ny;
  u.field.sigma_s.assign(n, sigma_s);
  u.field.sigma_a.assign(n, sigma_a);
  u.field.sigma_t.assign(n, sigma_s + sigma_a);
  u.bc.psi_inc_left.assign(ny, psi_inc);
  u.bc.psi_inc_right.assign(ny, psi_inc);
  u.bc.psi_inc_bottom.assign(nx, psi_inc);
  u.bc.psi_inc_top.assign(nx, psi_inc);
  u.bc.q.assign(n, q);
  return u;
}

/// Two-region strip: elements with i < split get (s_thin, a_thin), the rest
/// (s_thick, a_thick).
inline UniformProblem make_strip_problem(std::size_t nx, std::size_t ny, std::size_t split,
                                         double s_thin, double a_thin, double s_thick,
                                         double a_thick) {
  UniformProblem u = make_uniform_problem(nx, ny, 0.5, 0.5, 0.0, 0.0, 1.0, 0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t e = u.mesh.element_id(i, j);
      const double s = i < split ? s_thin : s_thick;
      const double a = i < split ? a_thin : a_thick;
      u.field.sigma_s[e] = s;
      u.field.sigma_a[e] = a;
      u.field.sigma_t[e] = s + a;
    }
  }
  return u;
}

} // namespace snkit::oracle

#endif
