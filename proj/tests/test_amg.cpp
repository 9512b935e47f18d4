#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "snkit/amg.hpp"
#include "snkit/errors.hpp"
#include "snkit/krylov.hpp"

using namespace snkit;

namespace {

SparseMatrixCSR poisson_1d(std::size_t n) {
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < n; ++i) {
    trips.push_back({i, i, 2.0});
    if (i > 0) trips.push_back({i, i - 1, -1.0});
    if (i + 1 < n) trips.push_back({i, i + 1, -1.0});
  }
  return csr_from_triplets(n, n, std::move(trips));
}

SparseMatrixCSR poisson_2d(std::size_t nx) {
  const std::size_t n = nx * nx;
  std::vector<Triplet> trips;
  auto id = [nx](std::size_t i, std::size_t j) { return j * nx + i; };
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t r = id(i, j);
      trips.push_back({r, r, 4.0});
      if (i > 0) trips.push_back({r, id(i - 1, j), -1.0});
      if (i + 1 < nx) trips.push_back({r, id(i + 1, j), -1.0});
      if (j > 0) trips.push_back({r, id(i, j - 1), -1.0});
      if (j + 1 < nx) trips.push_back({r, id(i, j + 1), -1.0});
    }
  }
  return csr_from_triplets(n, n, std::move(trips));
}

Vector random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = val(rng);
  return v;
}

} // namespace

TEST_CASE("1D Poisson builds a shrinking hierarchy") {
  const AmgConfig cfg;
  const AmgHierarchy h = amg_setup(poisson_1d(64), cfg);
  CHECK(h.n_levels() >= 2);
  for (std::size_t l = 1; l < h.n_levels(); ++l)
    CHECK(h.levels[l].a.n_rows < h.levels[l - 1].a.n_rows);
}

TEST_CASE("diagonal matrix yields a single exact level") {
  std::vector<Triplet> trips;
  const std::size_t n = 40;
  for (std::size_t i = 0; i < n; ++i) trips.push_back({i, i, 1.0 + static_cast<double>(i)});
  const SparseMatrixCSR a = csr_from_triplets(n, n, std::move(trips));
  const AmgHierarchy h = amg_setup(a, AmgConfig{});
  CHECK(h.n_levels() == 1);
  std::mt19937 rng(2);
  const Vector r = random_vector(n, rng);
  const Vector x = amg_apply(h, r);
  const Vector ax = spmv(a, x);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ax[i] - r[i]) <= 1e-12);
}

TEST_CASE("V-cycle reduction factor below 0.3 on 32x32 Poisson") {
  AmgConfig cfg;
  cfg.smoother = AmgSmoother::HybridGaussSeidelL1;
  const SparseMatrixCSR a = poisson_2d(32);
  const AmgHierarchy h = amg_setup(a, cfg);

  std::mt19937 rng(3);
  Vector x = random_vector(a.n_rows, rng);
  const Vector b(a.n_rows, 0.0);
  // Iterate x <- x + V(b - A x) toward the zero solution.
  Vector rates;
  double prev = 0.0;
  for (int it = 0; it < 15; ++it) {
    Vector r(a.n_rows);
    const Vector ax = spmv(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ax[i];
    const double rnorm = norm2(r);
    if (it >= 5 && prev > 0.0) rates.push_back(rnorm / prev);
    prev = rnorm;
    const Vector e = amg_apply(h, r);
    axpy(1.0, e, x);
  }
  double worst = 0.0;
  for (const double r : rates) worst = std::max(worst, r);
  CHECK(worst < 0.3);
}

TEST_CASE("apply maps zero to zero and is linear") {
  const SparseMatrixCSR a = poisson_2d(8);
  const AmgHierarchy h = amg_setup(a, AmgConfig{});
  const Vector zero(a.n_rows, 0.0);
  CHECK(amg_apply(h, zero) == zero);

  std::mt19937 rng(5);
  const Vector r1 = random_vector(a.n_rows, rng);
  const Vector r2 = random_vector(a.n_rows, rng);
  const double alpha = 0.37, beta = -1.21;
  Vector combo(a.n_rows);
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = alpha * r1[i] + beta * r2[i];
  const Vector lhs = amg_apply(h, combo);
  const Vector e1 = amg_apply(h, r1);
  const Vector e2 = amg_apply(h, r2);
  for (std::size_t i = 0; i < combo.size(); ++i) {
    const double rhs = alpha * e1[i] + beta * e2[i];
    CHECK(std::abs(lhs[i] - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("single-level hierarchy applies the exact inverse") {
  AmgConfig cfg;
  cfg.min_coarse_size = 100;  // force immediate coarsest
  const SparseMatrixCSR a = poisson_1d(32);
  const AmgHierarchy h = amg_setup(a, cfg);
  CHECK(h.n_levels() == 1);
  std::mt19937 rng(7);
  const Vector r = random_vector(32, rng);
  const Vector x = amg_apply(h, r);
  const Vector ax = spmv(a, x);
  for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(ax[i] - r[i]) <= 1e-12);
}

TEST_CASE("Galerkin coarse operators match an independent dense product") {
  const SparseMatrixCSR a = poisson_2d(12);
  const AmgHierarchy h = amg_setup(a, AmgConfig{});
  REQUIRE(h.n_levels() >= 2);
  for (std::size_t l = 0; l + 1 < h.n_levels(); ++l) {
    const DenseMatrix da = csr_to_dense(h.levels[l].a);
    const DenseMatrix dp = csr_to_dense(h.levels[l].p);
    const DenseMatrix dr = csr_to_dense(h.levels[l].r);
    const std::size_t nf = da.n_rows, nc = dp.n_cols;
    DenseMatrix ap(nf, nc);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nc; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < nf; ++k) s += da(i, k) * dp(k, j);
        ap(i, j) = s;
      }
    DenseMatrix rap(nc, nc);
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t j = 0; j < nc; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < nf; ++k) s += dr(i, k) * ap(k, j);
        rap(i, j) = s;
      }
    const DenseMatrix coarse = csr_to_dense(h.levels[l + 1].a);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t j = 0; j < nc; ++j)
        max_diff = std::max(max_diff, std::abs(coarse(i, j) - rap(i, j)));
    CHECK(max_diff < 1e-12);
  }
}

TEST_CASE("smoothers do not increase the A-seminorm of the error") {
  // Smoothing x toward the solution of A x = 0 from a random start: the
  // error is x itself, so e^T A e must not grow.
  const SparseMatrixCSR a = poisson_2d(16);
  const Vector zero_rhs(a.n_rows, 0.0);
  std::mt19937 rng(11);
  for (const AmgSmoother sm : {AmgSmoother::WeightedJacobi, AmgSmoother::HybridGaussSeidelL1}) {
    AmgConfig cfg;
    cfg.smoother = sm;
    const AmgHierarchy h = amg_setup(a, cfg);
    for (int rep = 0; rep < 5; ++rep) {
      Vector e = random_vector(a.n_rows, rng);
      const double before = dot(e, spmv(a, e));
      amg_smooth_once(h, 0, e, zero_rhs, /*forward=*/true);
      const double after = dot(e, spmv(a, e));
      CHECK(after <= before * (1.0 + 1e-12));
      amg_smooth_once(h, 0, e, zero_rhs, /*forward=*/false);
      const double after2 = dot(e, spmv(a, e));
      CHECK(after2 <= after * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("zero diagonal row is rejected with the row named") {
  std::vector<Triplet> trips = {{0, 0, 1.0}, {1, 2, 1.0}, {2, 2, 1.0}, {1, 0, 0.5}};
  const SparseMatrixCSR a = csr_from_triplets(3, 3, std::move(trips));
  try {
    amg_setup(a, AmgConfig{});
    FAIL("expected AmgSetupError");
  } catch (const AmgSetupError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("diagnostics JSON lists levels and complexity") {
  const AmgHierarchy h = amg_setup(poisson_2d(16), AmgConfig{});
  const std::string j = amg_diagnostics_json(h);
  CHECK(j.find("\"levels\"") != std::string::npos);
  CHECK(j.find("\"operator_complexity\"") != std::string::npos);
}
