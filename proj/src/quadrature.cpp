#include "snkit/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(std::size_t n, Vector& nodes, Vector& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

} // namespace

AngularQuadrature build_quadrature(std::size_t n) {
  if (n < 2 || n > 24 || n % 2 != 0)
    throw UsageError("build_quadrature: order must be even and in [2, 24], got " +
                     std::to_string(n));

  Vector mu, wmu;
  gauss_legendre(n, mu, wmu);

  AngularQuadrature q;
  q.order = n;
  const std::size_t half = n / 2;
  // Positive polar levels, ordered from the equator toward the pole; the
  // level closest to the equator carries the most azimuthal points.
  for (std::size_t l = 0; l < half; ++l) {
    const double mu_l = mu[half + l];       // ascending positive nodes
    const double w_l = wmu[half + l];
    const std::size_t n_phi = 4 * (half - l);
    const double w_dir = 2.0 * w_l * (2.0 * std::numbers::pi / static_cast<double>(n_phi));
    const double sin_theta = std::sqrt(1.0 - mu_l * mu_l);
    for (std::size_t m = 0; m < n_phi; ++m) {
      const double phi =
          (static_cast<double>(m) + 0.5) * (2.0 * std::numbers::pi / static_cast<double>(n_phi));
      // Alternating polar sign keeps the first moment of the reduced set at
      // zero without changing anything the 2D operators see.
      const double mu_signed = (m % 2 == 0) ? mu_l : -mu_l;
      q.directions.push_back({sin_theta * std::cos(phi), sin_theta * std::sin(phi), mu_signed});
      q.weights.push_back(w_dir);
    }
  }
  return q;
}

void gauss_legendre_unit(std::size_t n, Vector& points, Vector& weights) {
  gauss_legendre(n, points, weights);
  for (std::size_t i = 0; i < n; ++i) {
    points[i] = 0.5 * (points[i] + 1.0);
    weights[i] *= 0.5;
  }
}

DenseMatrix eddington_tensor(const AngularQuadrature& q) {
  DenseMatrix t(3, 3);
  const double scale = 1.0 / (4.0 * std::numbers::pi);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      double s = 0.0;
      for (std::size_t d = 0; d < q.size(); ++d)
        s += q.weights[d] * q.directions[d][j] * q.directions[d][k];
      t(j, k) = scale * s;
    }
  }
  return t;
}

} // namespace snkit
