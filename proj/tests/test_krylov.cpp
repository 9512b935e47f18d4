#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "snkit/dense_lu.hpp"
#include "snkit/errors.hpp"
#include "snkit/krylov.hpp"

using namespace snkit;

namespace {

OperatorAction diag_operator(Vector d) {
  return [d = std::move(d)](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
  };
}

} // namespace

TEST_CASE("identity converges in one iteration") {
  const Vector b = {1.0, -2.0, 0.5};
  KrylovConfig cfg;
  cfg.rel_tol = 1e-12;
  auto [x, rep] = gmres(diag_operator({1.0, 1.0, 1.0}), nullptr, b, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-13));
}

TEST_CASE("diagonal solve hits the exact solution") {
  KrylovConfig cfg;
  cfg.rel_tol = 1e-13;
  auto [x, rep] = gmres(diag_operator({1.0, 2.0, 4.0}), nullptr, Vector{1.0, 2.0, 4.0}, cfg);
  CHECK(rep.converged);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(x[i] - 1.0) < 1e-12);
}

TEST_CASE("zero right-hand side returns zero immediately") {
  KrylovConfig cfg;
  auto [x, rep] = gmres(diag_operator({2.0, 3.0}), nullptr, Vector{0.0, 0.0}, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.residual_history == Vector{0.0});
  CHECK(x == Vector{0.0, 0.0});
}

TEST_CASE("random SPD system matches the dense LU oracle") {
  std::mt19937 rng(23);
  const std::size_t n = 20;
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  DenseMatrix b_mat(n, n);
  for (double& v : b_mat.values) v = val(rng);
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = (i == j) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += b_mat(k, i) * b_mat(k, j);
      a(i, j) = s;
    }
  Vector rhs(n);
  for (double& v : rhs) v = val(rng);

  const LUFactors lu = lu_factor(a);
  const Vector x_ref = lu_solve(lu, rhs);

  OperatorAction apply_a = [&a, n](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
  };
  KrylovConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.max_iters = 200;
  auto [x, rep] = gmres(apply_a, nullptr, rhs, cfg);
  CHECK(rep.converged);
  Vector diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = x[i] - x_ref[i];
  CHECK(norm2(diff) < 1e-10 * norm2(x_ref));
}

TEST_CASE("restarted cycles still converge and history is monotone") {
  std::mt19937 rng(29);
  const std::size_t n = 30;
  std::uniform_real_distribution<double> val(-0.2, 0.2);
  DenseMatrix a(n, n);
  for (double& v : a.values) v = val(rng);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 2.0;
  Vector rhs(n);
  for (double& v : rhs) v = val(rng);

  OperatorAction apply_a = [&a, n](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
  };
  KrylovConfig cfg;
  cfg.restart = 5;
  cfg.rel_tol = 1e-11;
  cfg.max_iters = 300;
  auto [x, rep] = gmres(apply_a, nullptr, rhs, cfg);
  CHECK(rep.converged);
  CHECK(rep.residual_history.size() == rep.iterations + 1);
  for (std::size_t k = 1; k < rep.residual_history.size(); ++k)
    CHECK(rep.residual_history[k] <= rep.residual_history[k - 1] * (1.0 + 1e-10));
  CHECK(rep.final_rel_residual ==
        doctest::Approx(rep.residual_history.back() / rep.residual_history.front()));
}

TEST_CASE("right preconditioning reports true unpreconditioned residuals") {
  const Vector d = {1.0, 10.0, 100.0};
  const Vector b = {1.0, 1.0, 1.0};
  OperatorAction precond = diag_operator({1.0, 0.1, 0.01});
  KrylovConfig cfg;
  cfg.rel_tol = 1e-12;
  auto [x, rep] = gmres(diag_operator(d), precond, b, cfg);
  CHECK(rep.converged);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(x[i] == doctest::Approx(b[i] / d[i]).epsilon(1e-11));
  CHECK(rep.residual_history.front() == doctest::Approx(norm2(b)));
}

TEST_CASE("breakdown in an invariant subspace is reported, not thrown") {
  // A is singular; b has a component in the null space, so the best
  // achievable residual is nonzero and the Arnoldi space closes early.
  OperatorAction apply_a = diag_operator({1.0, 1.0, 0.0});
  const Vector b = {1.0, 0.5, 0.8};
  KrylovConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.max_iters = 50;
  auto [x, rep] = gmres(apply_a, nullptr, b, cfg);
  CHECK_FALSE(rep.converged);
  CHECK(rep.breakdown);
  // The reachable part is solved exactly.
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("NaN residual raises SolverError") {
  OperatorAction bad = [](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::nan("");
  };
  KrylovConfig cfg;
  CHECK_THROWS_AS(gmres(bad, nullptr, Vector{1.0, 1.0}, cfg), SolverError);
}

TEST_CASE("config validation") {
  KrylovConfig cfg;
  cfg.restart = 0;
  CHECK_THROWS_AS(gmres(diag_operator({1.0}), nullptr, Vector{1.0}, cfg), UsageError);
  cfg.restart = 30;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(gmres(diag_operator({1.0}), nullptr, Vector{1.0}, cfg), UsageError);
}
