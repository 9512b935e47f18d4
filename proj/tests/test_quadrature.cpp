#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "snkit/errors.hpp"
#include "snkit/quadrature.hpp"

using namespace snkit;

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;
}

TEST_CASE("moment invariants hold for every supported order") {
  for (std::size_t n = 2; n <= 24; n += 2) {
    CAPTURE(n);
    const AngularQuadrature q = build_quadrature(n);
    CHECK(q.size() == n * (n + 2) / 2);

    double wsum = 0.0;
    double m1[3] = {0.0, 0.0, 0.0};
    for (std::size_t d = 0; d < q.size(); ++d) {
      CHECK(q.weights[d] > 0.0);
      const auto& o = q.directions[d];
      const double norm = std::sqrt(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]);
      CHECK(std::abs(norm - 1.0) <= 1e-14);
      for (int k = 0; k < 3; ++k) {
        CHECK(o[static_cast<std::size_t>(k)] != 0.0);  // sweeps need nonzero components
        m1[k] += q.weights[d] * o[static_cast<std::size_t>(k)];
      }
      wsum += q.weights[d];
    }
    CHECK(std::abs(wsum - kFourPi) <= 1e-12 * kFourPi);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(m1[k]) <= 1e-12 * kFourPi);

    const DenseMatrix t = eddington_tensor(q);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        const double expected = (a == b) ? 1.0 / 3.0 : 0.0;
        CHECK(std::abs(t(a, b) - expected) <= 1e-10);
      }
  }
}

TEST_CASE("direction counts match the triangular rule") {
  CHECK(build_quadrature(8).size() == 40);
  CHECK(build_quadrature(2).size() == 4);
  CHECK(build_quadrature(12).size() == 84);
}

TEST_CASE("S2 has four equal weights summing to 4 pi") {
  const AngularQuadrature q = build_quadrature(2);
  REQUIRE(q.size() == 4);
  for (std::size_t d = 0; d < 4; ++d)
    CHECK(q.weights[d] == doctest::Approx(kFourPi / 4.0).epsilon(1e-14));
}

TEST_CASE("S8 second-moment tensor is diagonal to 1e-12") {
  const AngularQuadrature q = build_quadrature(8);
  const DenseMatrix t = eddington_tensor(q);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      if (a != b) CHECK(std::abs(t(a, b)) < 1e-12);
}

TEST_CASE("degenerate single-direction set gives a rank-1 tensor") {
  AngularQuadrature q;
  q.order = 0;
  q.directions.push_back({1.0, 0.0, 0.0});
  q.weights.push_back(kFourPi);
  const DenseMatrix t = eddington_tensor(q);
  CHECK(t(0, 0) == doctest::Approx(1.0));
  CHECK(t(1, 1) == 0.0);
  CHECK(t(2, 2) == 0.0);
  CHECK(t(0, 1) == 0.0);
}

TEST_CASE("unsupported orders are rejected") {
  CHECK_THROWS_AS(build_quadrature(3), UsageError);
  CHECK_THROWS_AS(build_quadrature(0), UsageError);
  CHECK_THROWS_AS(build_quadrature(26), UsageError);
}
