#ifndef SNKIT_QUADRATURE_HPP
#define SNKIT_QUADRATURE_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "snkit/sparse.hpp"

namespace snkit {

/// Discrete ordinate set: unit directions and positive weights summing to
/// 4*pi. Only the x/y components enter the 2D spatial operators; the z
/// component is retained so the moment identities hold for full 3-vectors.
struct AngularQuadrature {
  std::size_t order = 0;                         // even N
  std::vector<std::array<double, 3>> directions; // unit vectors
  Vector weights;                                // positive, sum 4*pi

  std::size_t size() const { return directions.size(); }
};

/// Triangular product rule: Gauss-Legendre levels in the polar cosine with
/// 4, 8, ..., 2N equally spaced azimuthal points per level, reduced to
/// N(N+2)/2 directions by the planar symmetry of 2D problems. Within each
/// level the sign of the polar cosine alternates between azimuthal points so
/// that odd moments vanish for the stored set. No direction has a zero
/// Cartesian component. Supported N: 2, 4, ..., 24.
AngularQuadrature build_quadrature(std::size_t n);

/// (1/4pi) sum_d w_d Omega_d Omega_d^T; approximately diag(1/3, 1/3, 1/3).
DenseMatrix eddington_tensor(const AngularQuadrature& q);

/// n-point Gauss-Legendre rule mapped to [0, 1].
void gauss_legendre_unit(std::size_t n, Vector& points, Vector& weights);

} // namespace snkit

#endif
