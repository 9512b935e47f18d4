#include "snkit/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

void apply_givens(double c, double s, double& a, double& b) {
  const double t = c * a + s * b;
  b = -s * a + c * b;
  a = t;
}

} // namespace

std::pair<Vector, SolveReport> gmres(const OperatorAction& apply_a,
                                     const OperatorAction& apply_m,
                                     std::span<const double> b,
                                     const KrylovConfig& cfg) {
  if (cfg.restart < 1) throw UsageError("gmres: restart must be >= 1");
  if (!(cfg.rel_tol > 0.0)) throw UsageError("gmres: rel_tol must be > 0");
  const std::size_t n = b.size();
  const std::size_t m = cfg.restart;

  SolveReport rep;
  Vector x(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.residual_history = {0.0};
    return {std::move(x), rep};
  }
  const double stop = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);

  Vector r(b.begin(), b.end());  // r = b - A*0
  double beta = bnorm;
  rep.residual_history.push_back(beta);

  std::vector<Vector> v(m + 1, Vector(n));
  std::vector<Vector> z(m, Vector(n));
  DenseMatrix h(m + 1, m);
  Vector g(m + 1), cs(m), sn(m);
  Vector w(n);

  auto true_residual = [&](const Vector& xv) {
    apply_a(xv, w);
    Vector res(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = b[i] - w[i];
    return res;
  };

  bool done = false;
  while (!done && rep.iterations < cfg.max_iters) {
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::size_t j = 0;

    for (; j < m && rep.iterations < cfg.max_iters; ++j) {
      if (apply_m)
        apply_m(v[j], z[j]);
      else
        std::copy(v[j].begin(), v[j].end(), z[j].begin());
      apply_a(z[j], w);

      // Modified Gram-Schmidt
      for (std::size_t i = 0; i <= j; ++i) {
        const double hij = dot(w, v[i]);
        h(i, j) = hij;
        axpy(-hij, v[i], w);
      }
      const double hnext = norm2(w);
      h(j + 1, j) = hnext;
      if (std::isnan(hnext)) throw SolverError("gmres: NaN encountered in Arnoldi process");

      for (std::size_t i = 0; i < j; ++i) apply_givens(cs[i], sn[i], h(i, j), h(i + 1, j));
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      if (denom > 0.0) {
        cs[j] = h(j, j) / denom;
        sn[j] = h(j + 1, j) / denom;
      } else {
        cs[j] = 1.0;
        sn[j] = 0.0;
      }
      apply_givens(cs[j], sn[j], h(j, j), h(j + 1, j));
      apply_givens(cs[j], sn[j], g[j], g[j + 1]);

      ++rep.iterations;
      const double est = std::abs(g[j + 1]);
      if (std::isnan(est)) throw SolverError("gmres: NaN residual estimate");
      rep.residual_history.push_back(est);

      if (hnext == 0.0) {
        // Arnoldi breakdown: Krylov space is invariant, current LS solution
        // is the best available. Report rather than abort.
        ++j;
        rep.breakdown = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) v[j + 1][i] = w[i] / hnext;
      if (est <= stop) {
        ++j;
        break;
      }
    }

    // x += Z y with H y = g solved by back substitution.
    Vector y(j);
    for (std::size_t ii = j; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t k = ii + 1; k < j; ++k) s -= h(ii, k) * y[k];
      y[ii] = s / h(ii, ii);
    }
    for (std::size_t k = 0; k < j; ++k) axpy(y[k], z[k], x);

    r = true_residual(x);
    beta = norm2(r);
    if (std::isnan(beta)) throw SolverError("gmres: NaN residual");
    if (beta <= stop) {
      rep.converged = true;
      done = true;
    } else if (rep.breakdown) {
      done = true;  // stagnated in an invariant subspace short of tolerance
    }
  }

  rep.residual_history.back() = beta;
  rep.final_rel_residual = beta / bnorm;
  if (!rep.converged && rep.final_rel_residual <= cfg.rel_tol) rep.converged = true;
  return {std::move(x), rep};
}

OperatorAction csr_operator(const SparseMatrixCSR& a) {
  return [&a](std::span<const double> x, std::span<double> y) {
    if (x.size() != a.n_cols || y.size() != a.n_rows)
      throw UsageError("csr_operator: dimension mismatch");
    for (std::size_t i = 0; i < a.n_rows; ++i) {
      double s = 0.0;
      for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
        s += a.values[k] * x[a.col_idx[k]];
      y[i] = s;
    }
  };
}

} // namespace snkit
