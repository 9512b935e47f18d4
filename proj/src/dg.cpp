#include "snkit/dg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

Vector lobatto_nodes(std::size_t p) {
  switch (p) {
    case 1: return {0.0, 1.0};
    case 2: return {0.0, 0.5, 1.0};
    case 3: {
      const double s = 1.0 / std::sqrt(5.0);
      return {0.0, 0.5 * (1.0 - s), 0.5 * (1.0 + s), 1.0};
    }
    case 4: {
      const double s = std::sqrt(3.0 / 7.0);
      return {0.0, 0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s), 1.0};
    }
    default: throw UsageError("DG order must lie in {1, 2, 3, 4}");
  }
}

double lagrange_value(const Vector& nodes, std::size_t a, double t) {
  double v = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == a) continue;
    v *= (t - nodes[k]) / (nodes[a] - nodes[k]);
  }
  return v;
}

double lagrange_deriv(const Vector& nodes, std::size_t a, double t) {
  double sum = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    if (m == a) continue;
    double term = 1.0 / (nodes[a] - nodes[m]);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k == a || k == m) continue;
      term *= (t - nodes[k]) / (nodes[a] - nodes[k]);
    }
    sum += term;
  }
  return sum;
}

} // namespace

double mnip_penalty_constant(std::size_t p) {
  return 0.1 * static_cast<double>(p) * static_cast<double>(p + 1);
}

DGSpace make_dg_space(const StructuredMesh& mesh, std::size_t order) {
  if (order < 1 || order > 4) throw UsageError("make_dg_space: order must lie in {1, 2, 3, 4}");
  if (mesh.nx == 0 || mesh.ny == 0) throw UsageError("make_dg_space: empty mesh");
  if (!(mesh.hx > 0.0) || !(mesh.hy > 0.0))
    throw UsageError("make_dg_space: cell sizes must be positive");
  return DGSpace{mesh, order};
}

TransportSystem assemble_transport(const DGSpace& space, const AngularQuadrature& quad,
                                   const CoefficientField& field, const BoundarySource& bc) {
  const std::size_t n_elem = space.mesh.n_elements();
  if (field.sigma_s.size() != n_elem || field.sigma_t.size() != n_elem ||
      field.sigma_a.size() != n_elem)
    throw UsageError("assemble_transport: coefficient field size mismatch");
  if (bc.q.size() != n_elem || bc.psi_inc_left.size() != space.mesh.ny ||
      bc.psi_inc_right.size() != space.mesh.ny || bc.psi_inc_bottom.size() != space.mesh.nx ||
      bc.psi_inc_top.size() != space.mesh.nx)
    throw UsageError("assemble_transport: boundary source size mismatch");

  TransportSystem sys;
  sys.space = space;
  sys.quad = quad;
  sys.field = field;
  sys.bc = bc;
  sys.eddington = eddington_tensor(quad);

  const std::size_t p = space.order;
  const std::size_t nn = p + 1;
  const Vector nodes = lobatto_nodes(p);

  const std::size_t nq = p + 2;
  gauss_legendre_unit(nq, sys.qpoints, sys.qweights);
  sys.shape_at_q = DenseMatrix(nq, nn);
  sys.dshape_at_q = DenseMatrix(nq, nn);
  for (std::size_t k = 0; k < nq; ++k) {
    for (std::size_t a = 0; a < nn; ++a) {
      sys.shape_at_q(k, a) = lagrange_value(nodes, a, sys.qpoints[k]);
      sys.dshape_at_q(k, a) = lagrange_deriv(nodes, a, sys.qpoints[k]);
    }
  }

  sys.m1 = DenseMatrix(nn, nn);
  sys.c1 = DenseMatrix(nn, nn);
  sys.k1 = DenseMatrix(nn, nn);
  for (std::size_t a = 0; a < nn; ++a) {
    for (std::size_t c = 0; c < nn; ++c) {
      double m = 0.0, cv = 0.0, kv = 0.0;
      for (std::size_t k = 0; k < nq; ++k) {
        const double w = sys.qweights[k];
        m += w * sys.shape_at_q(k, a) * sys.shape_at_q(k, c);
        cv += w * sys.shape_at_q(k, a) * sys.dshape_at_q(k, c);
        kv += w * sys.dshape_at_q(k, a) * sys.dshape_at_q(k, c);
      }
      sys.m1(a, c) = m;
      sys.c1(a, c) = cv;
      sys.k1(a, c) = kv;
    }
  }

  // sigma_t classes (piecewise-constant materials give a handful of values)
  sys.sigma_class.resize(n_elem);
  for (std::size_t e = 0; e < n_elem; ++e) {
    const double st = field.sigma_t[e];
    std::size_t cls = sys.class_sigma_t.size();
    for (std::size_t c = 0; c < sys.class_sigma_t.size(); ++c) {
      if (sys.class_sigma_t[c] == st) {
        cls = c;
        break;
      }
    }
    if (cls == sys.class_sigma_t.size()) sys.class_sigma_t.push_back(st);
    sys.sigma_class[e] = cls;
  }

  // Factor the element diagonal block of every (ordinate, sigma_t) pair:
  //   B = wx Gx + wy Gy + sigma_t M + |wx| Fx_in + |wy| Fy_in.
  const double hx = space.mesh.hx, hy = space.mesh.hy;
  const std::size_t n_loc = space.dofs_per_element();
  const std::size_t n_cls = sys.class_sigma_t.size();
  sys.block_lu.reserve(quad.size() * n_cls);
  for (std::size_t d = 0; d < quad.size(); ++d) {
    const double wx = quad.directions[d][0];
    const double wy = quad.directions[d][1];
    const std::size_t ax_in = wx > 0.0 ? 0 : p;  // inflow x face layer
    const std::size_t by_in = wy > 0.0 ? 0 : p;
    for (std::size_t cls = 0; cls < n_cls; ++cls) {
      const double st = sys.class_sigma_t[cls];
      DenseMatrix b(n_loc, n_loc);
      for (std::size_t bb = 0; bb < nn; ++bb) {
        for (std::size_t a = 0; a < nn; ++a) {
          const std::size_t row = bb * nn + a;
          for (std::size_t dd = 0; dd < nn; ++dd) {
            for (std::size_t c = 0; c < nn; ++c) {
              const std::size_t col = dd * nn + c;
              double v = wx * sys.c1(a, c) * hy * sys.m1(bb, dd) +
                         wy * hx * sys.m1(a, c) * sys.c1(bb, dd) +
                         st * hx * hy * sys.m1(a, c) * sys.m1(bb, dd);
              if (a == ax_in && c == ax_in) v += std::abs(wx) * hy * sys.m1(bb, dd);
              if (bb == by_in && dd == by_in) v += std::abs(wy) * hx * sys.m1(a, c);
              b(row, col) = v;
            }
          }
        }
      }
      try {
        sys.block_lu.push_back(lu_factor(std::move(b)));
      } catch (const SingularMatrixError&) {
        throw SingularMatrixError("assemble_transport: singular element block for ordinate " +
                                  std::to_string(d) + ", sigma_t " + std::to_string(st));
      }
    }
  }

  // Block-diagonal coefficient mass matrices.
  auto build_mass = [&](auto weight_of) {
    std::vector<Triplet> trips;
    trips.reserve(n_elem * n_loc * n_loc);
    for (std::size_t e = 0; e < n_elem; ++e) {
      const double w = weight_of(e);
      const std::size_t base = e * n_loc;
      for (std::size_t bb = 0; bb < nn; ++bb)
        for (std::size_t a = 0; a < nn; ++a)
          for (std::size_t dd = 0; dd < nn; ++dd)
            for (std::size_t c = 0; c < nn; ++c)
              trips.push_back({base + bb * nn + a, base + dd * nn + c,
                               w * hx * hy * sys.m1(a, c) * sys.m1(bb, dd)});
    }
    return csr_from_triplets(space.n_dofs(), space.n_dofs(), std::move(trips));
  };
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  sys.scatter_mass = build_mass([&](std::size_t e) { return field.sigma_s[e] * inv4pi; });
  sys.sigma_t_mass = build_mass([&](std::size_t e) { return field.sigma_t[e]; });
  sys.sigma_a_mass = build_mass([&](std::size_t e) { return field.sigma_a[e]; });
  return sys;
}

std::vector<std::size_t> sweep_element_order(const StructuredMesh& mesh, double omega_x,
                                             double omega_y) {
  std::vector<std::size_t> order;
  order.reserve(mesh.n_elements());
  for (std::size_t jj = 0; jj < mesh.ny; ++jj) {
    const std::size_t j = omega_y > 0.0 ? jj : mesh.ny - 1 - jj;
    for (std::size_t ii = 0; ii < mesh.nx; ++ii) {
      const std::size_t i = omega_x > 0.0 ? ii : mesh.nx - 1 - ii;
      order.push_back(mesh.element_id(i, j));
    }
  }
  return order;
}

Vector sweep_solve(const TransportSystem& sys, std::size_t d, std::span<const double> rhs) {
  if (d >= sys.quad.size()) throw UsageError("sweep_solve: ordinate index out of range");
  if (rhs.size() != sys.n_dofs()) throw UsageError("sweep_solve: rhs length mismatch");
  const StructuredMesh& mesh = sys.space.mesh;
  const std::size_t p = sys.space.order;
  const std::size_t nn = p + 1;
  const std::size_t n_loc = sys.space.dofs_per_element();
  const double wx = sys.quad.directions[d][0];
  const double wy = sys.quad.directions[d][1];
  const double hx = mesh.hx, hy = mesh.hy;
  const long sx = wx > 0.0 ? 1 : -1;
  const long sy = wy > 0.0 ? 1 : -1;
  const std::size_t ax_in = wx > 0.0 ? 0 : p;   // own inflow x layer
  const std::size_t ax_nbr = wx > 0.0 ? p : 0;  // neighbor trace layer
  const std::size_t by_in = wy > 0.0 ? 0 : p;
  const std::size_t by_nbr = wy > 0.0 ? p : 0;

  Vector x(sys.n_dofs(), 0.0);
  Vector loc(n_loc);
  const std::size_t n_cls = sys.class_sigma_t.size();

  for (std::size_t jj = 0; jj < mesh.ny; ++jj) {
    const std::size_t j = wy > 0.0 ? jj : mesh.ny - 1 - jj;
    for (std::size_t ii = 0; ii < mesh.nx; ++ii) {
      const std::size_t i = wx > 0.0 ? ii : mesh.nx - 1 - ii;
      const std::size_t e = mesh.element_id(i, j);
      const std::size_t base = e * n_loc;
      for (std::size_t m = 0; m < n_loc; ++m) loc[m] = rhs[base + m];

      const long in = static_cast<long>(i) - sx;
      if (in >= 0 && in < static_cast<long>(mesh.nx)) {
        const std::size_t nbr = mesh.element_id(static_cast<std::size_t>(in), j) * n_loc;
        const double s = std::abs(wx) * hy;
        for (std::size_t b = 0; b < nn; ++b) {
          double acc = 0.0;
          for (std::size_t dd = 0; dd < nn; ++dd)
            acc += sys.m1(b, dd) * x[nbr + dd * nn + ax_nbr];
          loc[b * nn + ax_in] += s * acc;
        }
      }
      const long jn = static_cast<long>(j) - sy;
      if (jn >= 0 && jn < static_cast<long>(mesh.ny)) {
        const std::size_t nbr = mesh.element_id(i, static_cast<std::size_t>(jn)) * n_loc;
        const double s = std::abs(wy) * hx;
        for (std::size_t a = 0; a < nn; ++a) {
          double acc = 0.0;
          for (std::size_t c = 0; c < nn; ++c) acc += sys.m1(a, c) * x[nbr + by_nbr * nn + c];
          loc[by_in * nn + a] += s * acc;
        }
      }

      lu_solve_inplace(sys.block_lu[d * n_cls + sys.sigma_class[e]], loc);
      for (std::size_t m = 0; m < n_loc; ++m) x[base + m] = loc[m];
    }
  }
  return x;
}

Vector ordinate_rhs(const TransportSystem& sys, std::size_t d) {
  if (d >= sys.quad.size()) throw UsageError("ordinate_rhs: ordinate index out of range");
  const StructuredMesh& mesh = sys.space.mesh;
  const std::size_t p = sys.space.order;
  const std::size_t nn = p + 1;
  const std::size_t n_loc = sys.space.dofs_per_element();
  const double wx = sys.quad.directions[d][0];
  const double wy = sys.quad.directions[d][1];
  const double hx = mesh.hx, hy = mesh.hy;

  Vector m1_rowsum(nn, 0.0);
  for (std::size_t a = 0; a < nn; ++a)
    for (std::size_t c = 0; c < nn; ++c) m1_rowsum[a] += sys.m1(a, c);

  Vector rhs(sys.n_dofs(), 0.0);
  // Volumetric isotropic source.
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const double q = sys.bc.q[e];
    if (q == 0.0) continue;
    const std::size_t base = e * n_loc;
    for (std::size_t b = 0; b < nn; ++b)
      for (std::size_t a = 0; a < nn; ++a)
        rhs[base + b * nn + a] += q * hx * hy * m1_rowsum[a] * m1_rowsum[b];
  }
  // Incident flux on inflow boundary faces.
  if (wx > 0.0) {
    for (std::size_t j = 0; j < mesh.ny; ++j) {
      const double v = std::abs(wx) * sys.bc.psi_inc_left[j] * hy;
      const std::size_t base = mesh.element_id(0, j) * n_loc;
      for (std::size_t b = 0; b < nn; ++b) rhs[base + b * nn + 0] += v * m1_rowsum[b];
    }
  } else {
    for (std::size_t j = 0; j < mesh.ny; ++j) {
      const double v = std::abs(wx) * sys.bc.psi_inc_right[j] * hy;
      const std::size_t base = mesh.element_id(mesh.nx - 1, j) * n_loc;
      for (std::size_t b = 0; b < nn; ++b) rhs[base + b * nn + p] += v * m1_rowsum[b];
    }
  }
  if (wy > 0.0) {
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      const double v = std::abs(wy) * sys.bc.psi_inc_bottom[i] * hx;
      const std::size_t base = mesh.element_id(i, 0) * n_loc;
      for (std::size_t a = 0; a < nn; ++a) rhs[base + 0 * nn + a] += v * m1_rowsum[a];
    }
  } else {
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      const double v = std::abs(wy) * sys.bc.psi_inc_top[i] * hx;
      const std::size_t base = mesh.element_id(i, mesh.ny - 1) * n_loc;
      for (std::size_t a = 0; a < nn; ++a) rhs[base + p * nn + a] += v * m1_rowsum[a];
    }
  }
  return rhs;
}

Vector schur_apply(const TransportSystem& sys, std::span<const double> phi) {
  if (phi.size() != sys.n_dofs()) throw UsageError("schur_apply: vector length mismatch");
  Vector result(phi.begin(), phi.end());
  const Vector scattered = spmv(sys.scatter_mass, phi);
  for (std::size_t d = 0; d < sys.quad.size(); ++d) {
    const Vector psi = sweep_solve(sys, d, scattered);
    axpy(-sys.quad.weights[d], psi, result);
  }
  return result;
}

Vector schur_rhs(const TransportSystem& sys) {
  Vector b(sys.n_dofs(), 0.0);
  for (std::size_t d = 0; d < sys.quad.size(); ++d) {
    const Vector rhs = ordinate_rhs(sys, d);
    const Vector psi = sweep_solve(sys, d, rhs);
    axpy(sys.quad.weights[d], psi, b);
  }
  return b;
}

SparseMatrixCSR assemble_ordinate_matrix(const TransportSystem& sys, std::size_t d) {
  if (d >= sys.quad.size()) throw UsageError("assemble_ordinate_matrix: ordinate out of range");
  const StructuredMesh& mesh = sys.space.mesh;
  const std::size_t p = sys.space.order;
  const std::size_t nn = p + 1;
  const std::size_t n_loc = sys.space.dofs_per_element();
  const double wx = sys.quad.directions[d][0];
  const double wy = sys.quad.directions[d][1];
  const double hx = mesh.hx, hy = mesh.hy;
  const std::size_t ax_in = wx > 0.0 ? 0 : p;
  const std::size_t ax_nbr = wx > 0.0 ? p : 0;
  const std::size_t by_in = wy > 0.0 ? 0 : p;
  const std::size_t by_nbr = wy > 0.0 ? p : 0;
  const long sx = wx > 0.0 ? 1 : -1;
  const long sy = wy > 0.0 ? 1 : -1;

  std::vector<Triplet> trips;
  for (std::size_t j = 0; j < mesh.ny; ++j) {
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      const std::size_t e = mesh.element_id(i, j);
      const std::size_t base = e * n_loc;
      const double st = sys.field.sigma_t[e];
      for (std::size_t bb = 0; bb < nn; ++bb) {
        for (std::size_t a = 0; a < nn; ++a) {
          const std::size_t row = base + bb * nn + a;
          for (std::size_t dd = 0; dd < nn; ++dd) {
            for (std::size_t c = 0; c < nn; ++c) {
              double v = wx * sys.c1(a, c) * hy * sys.m1(bb, dd) +
                         wy * hx * sys.m1(a, c) * sys.c1(bb, dd) +
                         st * hx * hy * sys.m1(a, c) * sys.m1(bb, dd);
              if (a == ax_in && c == ax_in) v += std::abs(wx) * hy * sys.m1(bb, dd);
              if (bb == by_in && dd == by_in) v += std::abs(wy) * hx * sys.m1(a, c);
              trips.push_back({row, base + dd * nn + c, v});
            }
          }
        }
      }
      // Upwind coupling to the x and y neighbors.
      const long in = static_cast<long>(i) - sx;
      if (in >= 0 && in < static_cast<long>(mesh.nx)) {
        const std::size_t nbr = mesh.element_id(static_cast<std::size_t>(in), j) * n_loc;
        for (std::size_t b = 0; b < nn; ++b)
          for (std::size_t dd = 0; dd < nn; ++dd)
            trips.push_back({base + b * nn + ax_in, nbr + dd * nn + ax_nbr,
                             -std::abs(wx) * hy * sys.m1(b, dd)});
      }
      const long jn = static_cast<long>(j) - sy;
      if (jn >= 0 && jn < static_cast<long>(mesh.ny)) {
        const std::size_t nbr = mesh.element_id(i, static_cast<std::size_t>(jn)) * n_loc;
        for (std::size_t a = 0; a < nn; ++a)
          for (std::size_t c = 0; c < nn; ++c)
            trips.push_back({base + by_in * nn + a, nbr + by_nbr * nn + c,
                             -std::abs(wy) * hx * sys.m1(a, c)});
      }
    }
  }
  return csr_from_triplets(sys.n_dofs(), sys.n_dofs(), std::move(trips));
}

SparseMatrixCSR assemble_ordinate_jump_matrix(const TransportSystem& sys, std::size_t d) {
  if (d >= sys.quad.size()) throw UsageError("assemble_ordinate_jump_matrix: ordinate out of range");
  const StructuredMesh& mesh = sys.space.mesh;
  const std::size_t p = sys.space.order;
  const std::size_t nn = p + 1;
  const std::size_t n_loc = sys.space.dofs_per_element();
  const double wx = sys.quad.directions[d][0];
  const double wy = sys.quad.directions[d][1];
  const double hx = mesh.hx, hy = mesh.hy;

  std::vector<Triplet> trips;
  // Interior vertical faces between (i-1, j) and (i, j): jump pairing over
  // the two face layers with signs (-side +1, +side -1).
  for (std::size_t j = 0; j < mesh.ny; ++j) {
    for (std::size_t i = 1; i < mesh.nx; ++i) {
      const std::size_t em = mesh.element_id(i - 1, j) * n_loc;
      const std::size_t ep = mesh.element_id(i, j) * n_loc;
      const double coef = 0.5 * std::abs(wx) * hy;
      for (std::size_t b = 0; b < nn; ++b) {
        for (std::size_t dd = 0; dd < nn; ++dd) {
          const double v = coef * sys.m1(b, dd);
          trips.push_back({em + b * nn + p, em + dd * nn + p, v});
          trips.push_back({em + b * nn + p, ep + dd * nn + 0, -v});
          trips.push_back({ep + b * nn + 0, em + dd * nn + p, -v});
          trips.push_back({ep + b * nn + 0, ep + dd * nn + 0, v});
        }
      }
    }
  }
  for (std::size_t j = 1; j < mesh.ny; ++j) {
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      const std::size_t em = mesh.element_id(i, j - 1) * n_loc;
      const std::size_t ep = mesh.element_id(i, j) * n_loc;
      const double coef = 0.5 * std::abs(wy) * hx;
      for (std::size_t a = 0; a < nn; ++a) {
        for (std::size_t c = 0; c < nn; ++c) {
          const double v = coef * sys.m1(a, c);
          trips.push_back({em + p * nn + a, em + p * nn + c, v});
          trips.push_back({em + p * nn + a, ep + 0 * nn + c, -v});
          trips.push_back({ep + 0 * nn + a, em + p * nn + c, -v});
          trips.push_back({ep + 0 * nn + a, ep + 0 * nn + c, v});
        }
      }
    }
  }
  // Boundary faces: [[u]] = u on the single existing side.
  for (std::size_t j = 0; j < mesh.ny; ++j) {
    for (const std::size_t i : {std::size_t{0}, mesh.nx - 1}) {
      const std::size_t layer = (i == 0) ? 0 : p;
      const std::size_t e = mesh.element_id(i, j) * n_loc;
      const double coef = 0.5 * std::abs(wx) * hy;
      for (std::size_t b = 0; b < nn; ++b)
        for (std::size_t dd = 0; dd < nn; ++dd)
          trips.push_back({e + b * nn + layer, e + dd * nn + layer, coef * sys.m1(b, dd)});
      if (mesh.nx == 1) break;
    }
  }
  for (std::size_t i = 0; i < mesh.nx; ++i) {
    for (const std::size_t j : {std::size_t{0}, mesh.ny - 1}) {
      const std::size_t layer = (j == 0) ? 0 : p;
      const std::size_t e = mesh.element_id(i, j) * n_loc;
      const double coef = 0.5 * std::abs(wy) * hx;
      for (std::size_t a = 0; a < nn; ++a)
        for (std::size_t c = 0; c < nn; ++c)
          trips.push_back({e + layer * nn + a, e + layer * nn + c, coef * sys.m1(a, c)});
      if (mesh.ny == 1) break;
    }
  }
  return csr_from_triplets(sys.n_dofs(), sys.n_dofs(), std::move(trips));
}

namespace {

// Angular half-sums over ordinates with positive / negative component along
// a unit axis k (0 = x, 1 = y): sum w_d |Omega_dk| restricted by sign.
void angular_half_sums(const AngularQuadrature& quad, int axis, double& s_pos, double& s_neg) {
  s_pos = 0.0;
  s_neg = 0.0;
  for (std::size_t d = 0; d < quad.size(); ++d) {
    const double c = quad.directions[d][static_cast<std::size_t>(axis)];
    if (c > 0.0)
      s_pos += quad.weights[d] * c;
    else
      s_neg += quad.weights[d] * (-c);
  }
}

struct DsaAssembler {
  const TransportSystem& sys;
  DsaKind kind;
  DsaScope scope;
  double eta;

  std::size_t p, nn, n_loc, nq;
  double hx, hy;
  double i2[2][2];         // xy block of the discrete second-moment tensor
  double kappa_x_pos, kappa_x_neg, kappa_y_pos, kappa_y_neg;  // (1/8pi) half sums
  Vector dshape_end0, dshape_end1;
  std::vector<bool> in_scope;
  std::vector<std::size_t> dof_map;
  std::vector<std::size_t> global_to_local;
  std::vector<Triplet> trips;

  explicit DsaAssembler(const TransportSystem& s, DsaKind k, DsaScope sc, double e)
      : sys(s), kind(k), scope(sc), eta(e) {
    p = sys.space.order;
    nn = p + 1;
    n_loc = sys.space.dofs_per_element();
    nq = sys.qpoints.size();
    hx = sys.space.mesh.hx;
    hy = sys.space.mesh.hy;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        i2[a][b] = sys.eddington(static_cast<std::size_t>(a), static_cast<std::size_t>(b));

    const double inv8pi = 1.0 / (8.0 * std::numbers::pi);
    double sp, sn;
    angular_half_sums(sys.quad, 0, sp, sn);
    kappa_x_pos = inv8pi * sp;
    kappa_x_neg = inv8pi * sn;
    angular_half_sums(sys.quad, 1, sp, sn);
    kappa_y_pos = inv8pi * sp;
    kappa_y_neg = inv8pi * sn;

    const Vector nodes = lobatto_nodes(p);
    dshape_end0.resize(nn);
    dshape_end1.resize(nn);
    for (std::size_t a = 0; a < nn; ++a) {
      dshape_end0[a] = lagrange_deriv(nodes, a, 0.0);
      dshape_end1[a] = lagrange_deriv(nodes, a, 1.0);
    }

    const std::size_t n_elem = sys.space.mesh.n_elements();
    in_scope.assign(n_elem, true);
    if (scope == DsaScope::ThickOnly) {
      for (std::size_t e2 = 0; e2 < n_elem; ++e2)
        in_scope[e2] = sys.field.sigma_s[e2] >= eta;
    }
    global_to_local.assign(sys.n_dofs(), static_cast<std::size_t>(-1));
    for (std::size_t e2 = 0; e2 < n_elem; ++e2) {
      if (!in_scope[e2]) continue;
      for (std::size_t m = 0; m < n_loc; ++m) {
        global_to_local[e2 * n_loc + m] = dof_map.size();
        dof_map.push_back(e2 * n_loc + m);
      }
    }
  }

  double sigma_t_checked(std::size_t e) const {
    const double st = sys.field.sigma_t[e];
    if (st == 0.0)
      throw VoidInScopeError("assemble_dsa: sigma_t = 0 on element " + std::to_string(e) +
                                 " inside the requested scope",
                             e);
    return st;
  }

  void add(std::size_t grow, std::size_t gcol, double v) {
    const std::size_t r = global_to_local[grow];
    const std::size_t c = global_to_local[gcol];
    if (r == static_cast<std::size_t>(-1) || c == static_cast<std::size_t>(-1)) return;
    trips.push_back({r, c, v});
  }

  void volume_terms() {
    const StructuredMesh& mesh = sys.space.mesh;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
      if (!in_scope[e]) continue;
      const double st = sigma_t_checked(e);
      const double sa = sys.field.sigma_a[e];
      const std::size_t base = e * n_loc;
      const double inv_st = 1.0 / st;
      for (std::size_t bb = 0; bb < nn; ++bb) {
        for (std::size_t a = 0; a < nn; ++a) {
          const std::size_t row = base + bb * nn + a;
          for (std::size_t dd = 0; dd < nn; ++dd) {
            for (std::size_t c = 0; c < nn; ++c) {
              const double kxx = (hy / hx) * sys.k1(a, c) * sys.m1(bb, dd);
              const double kyy = (hx / hy) * sys.m1(a, c) * sys.k1(bb, dd);
              double v;
              if (kind == DsaKind::SIP) {
                const double kxy = sys.c1(c, a) * sys.c1(bb, dd);
                const double kyx = sys.c1(a, c) * sys.c1(dd, bb);
                v = inv_st * (i2[0][0] * kxx + i2[1][1] * kyy + i2[0][1] * (kxy + kyx));
              } else {
                v = inv_st * (kxx + kyy) / 3.0;
              }
              v += sa * hx * hy * sys.m1(a, c) * sys.m1(bb, dd);
              add(row, base + dd * nn + c, v);
            }
          }
        }
      }
    }
  }

  // One face. n = (nx_, ny_) is the unit normal pointing from the minus side
  // to the plus side (outward for boundary faces). elem_plus ==
  // SIZE_MAX marks a boundary face. face_x: face normal along x.
  void face_terms(bool face_x, std::size_t elem_minus, std::size_t elem_plus, double nx_,
                  double ny_) {
    const bool boundary = elem_plus == static_cast<std::size_t>(-1);
    const bool minus_in = in_scope[elem_minus];
    const bool plus_in = !boundary && in_scope[elem_plus];
    if (!minus_in && !plus_in) return;

    const double ht = face_x ? hy : hx;      // transverse (integration) extent
    const double hn = face_x ? hx : hy;      // extent normal to the face
    // Penalty angular coefficient: (1/8pi) sum_d w_d |Omega_d . n|, split by
    // the sign of Omega_d . n so the modified penalty can pick the upwind
    // side. For n = -x the roles of the half sums swap.
    double k_pos = face_x ? kappa_x_pos : kappa_y_pos;
    double k_neg = face_x ? kappa_x_neg : kappa_y_neg;
    if ((face_x ? nx_ : ny_) < 0.0) std::swap(k_pos, k_neg);

    // mNIP penalty factors per side (upwind value at the integration point;
    // constant along straight faces with elementwise-constant sigma_t).
    const double cp = mnip_penalty_constant(p);
    auto mnip_factor = [&](std::size_t elem) {
      const double st = sys.field.sigma_t[elem];
      if (st == 0.0)
        throw VoidInScopeError(
            "assemble_dsa: modified penalty needs sigma_t > 0 on element " +
                std::to_string(elem) + " adjacent to an in-scope face",
            elem);
      return std::max(cp / (st * hn), 1.0);
    };

    // Side data: trace layer index and endpoint derivative table.
    const std::size_t layer_minus = p;  // minus element touches the face at its upper layer
    const std::size_t layer_plus = 0;
    // For a boundary face the element may sit on either side of the normal:
    // left/bottom boundaries have outward normal -x/-y and the element is
    // the "plus"-positioned one geometrically, but we treat it as the minus
    // side of the trace ([[u]] = u). Its actual layer depends on the normal.
    std::size_t bl = layer_minus;
    if (boundary && ((face_x ? nx_ : ny_) < 0.0)) bl = layer_plus;
    const std::size_t eff_layer_minus = boundary ? bl : layer_minus;

    struct Side {
      std::size_t elem;
      std::size_t layer;
      double sign;      // jump sign
      bool active;
    };
    Side sides[2] = {{elem_minus, eff_layer_minus, 1.0, true},
                     {boundary ? std::size_t{0} : elem_plus, layer_plus, -1.0, !boundary}};

    const double in_x = face_x ? (i2[0][0] * nx_) : (i2[0][1] * ny_);
    const double in_y = face_x ? (i2[1][0] * nx_) : (i2[1][1] * ny_);

    for (std::size_t kq = 0; kq < nq; ++kq) {
      const double wq = sys.qweights[kq] * ht;

      double pen;
      if (kind == DsaKind::MNIP) {
        const double f_minus = mnip_factor(elem_minus);
        const double f_plus = boundary ? f_minus : mnip_factor(elem_plus);
        pen = k_pos * f_minus + k_neg * f_plus;
      } else {
        pen = k_pos + k_neg;
      }

      for (const Side& sv : sides) {
        if (!sv.active || !in_scope[sv.elem]) continue;
        for (const Side& su : sides) {
          if (!su.active || !in_scope[su.elem]) continue;
          // Penalty: pen * [[u]] [[v]] over face layers.
          for (std::size_t b = 0; b < nn; ++b) {
            const double tv = sys.shape_at_q(kq, b);
            const std::size_t row = sv.elem * n_loc + (face_x ? b * nn + sv.layer : sv.layer * nn + b);
            for (std::size_t dd = 0; dd < nn; ++dd) {
              const double tu = sys.shape_at_q(kq, dd);
              const std::size_t col =
                  su.elem * n_loc + (face_x ? dd * nn + su.layer : su.layer * nn + dd);
              add(row, col, wq * pen * sv.sign * su.sign * tv * tu);
            }
          }
          // Consistency: -[[v]] {sigma_t^-1 (I n) . grad u} (NIP and SIP) and
          // the transposed term -[[u]] {sigma_t^-1 (I n) . grad v} (SIP only).
          const double inv_st_u = 1.0 / sigma_t_checked(su.elem);
          const double inv_st_v = 1.0 / sigma_t_checked(sv.elem);
          const Vector& dend_u = (su.layer == 0) ? dshape_end0 : dshape_end1;
          const Vector& dend_v = (sv.layer == 0) ? dshape_end0 : dshape_end1;
          for (std::size_t b = 0; b < nn; ++b) {
            const double tv = sys.shape_at_q(kq, b);
            const std::size_t row_tr =
                sv.elem * n_loc + (face_x ? b * nn + sv.layer : sv.layer * nn + b);
            for (std::size_t aa = 0; aa < nn; ++aa) {
              for (std::size_t dd = 0; dd < nn; ++dd) {
                // u basis with (normal index aa, transverse index dd)
                double du_n, du_t;
                if (face_x) {
                  du_n = (1.0 / hx) * dend_u[aa] * sys.shape_at_q(kq, dd);
                  du_t = ((aa == su.layer) ? 1.0 : 0.0) * (1.0 / hy) * sys.dshape_at_q(kq, dd);
                } else {
                  du_n = (1.0 / hy) * dend_u[aa] * sys.shape_at_q(kq, dd);
                  du_t = ((aa == su.layer) ? 1.0 : 0.0) * (1.0 / hx) * sys.dshape_at_q(kq, dd);
                }
                // (I n) . grad u: normal direction carries in_x/in_y per axis
                double g_u;
                if (face_x)
                  g_u = in_x * du_n + in_y * du_t;
                else
                  g_u = in_y * du_n + in_x * du_t;
                const std::size_t col_full =
                    su.elem * n_loc + (face_x ? dd * nn + aa : aa * nn + dd);
                add(row_tr, col_full, -wq * 0.5 * sv.sign * inv_st_u * tv * g_u);
                if (kind == DsaKind::SIP) {
                  // transpose role: rows from full u... assembled as
                  // -[[u]] {sigma^-1 (I n) . grad v}: v takes the gradient.
                  double dv_n, dv_t;
                  if (face_x) {
                    dv_n = (1.0 / hx) * dend_v[aa] * sys.shape_at_q(kq, dd);
                    dv_t = ((aa == sv.layer) ? 1.0 : 0.0) * (1.0 / hy) * sys.dshape_at_q(kq, dd);
                  } else {
                    dv_n = (1.0 / hy) * dend_v[aa] * sys.shape_at_q(kq, dd);
                    dv_t = ((aa == sv.layer) ? 1.0 : 0.0) * (1.0 / hx) * sys.dshape_at_q(kq, dd);
                  }
                  double g_v;
                  if (face_x)
                    g_v = in_x * dv_n + in_y * dv_t;
                  else
                    g_v = in_y * dv_n + in_x * dv_t;
                  const std::size_t row_full =
                      sv.elem * n_loc + (face_x ? dd * nn + aa : aa * nn + dd);
                  const std::size_t col_tr =
                      su.elem * n_loc + (face_x ? b * nn + su.layer : su.layer * nn + b);
                  add(row_full, col_tr, -wq * 0.5 * su.sign * inv_st_v * sys.shape_at_q(kq, b) * g_v);
                }
              }
            }
          }
        }
      }
    }
  }

  void all_faces() {
    const StructuredMesh& mesh = sys.space.mesh;
    for (std::size_t j = 0; j < mesh.ny; ++j)
      for (std::size_t i = 1; i < mesh.nx; ++i)
        face_terms(true, mesh.element_id(i - 1, j), mesh.element_id(i, j), 1.0, 0.0);
    for (std::size_t j = 1; j < mesh.ny; ++j)
      for (std::size_t i = 0; i < mesh.nx; ++i)
        face_terms(false, mesh.element_id(i, j - 1), mesh.element_id(i, j), 0.0, 1.0);
    const std::size_t none = static_cast<std::size_t>(-1);
    for (std::size_t j = 0; j < mesh.ny; ++j) {
      face_terms(true, mesh.element_id(0, j), none, -1.0, 0.0);
      face_terms(true, mesh.element_id(mesh.nx - 1, j), none, 1.0, 0.0);
    }
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      face_terms(false, mesh.element_id(i, 0), none, 0.0, -1.0);
      face_terms(false, mesh.element_id(i, mesh.ny - 1), none, 0.0, 1.0);
    }
  }
};

} // namespace

DsaMatrix assemble_dsa(const TransportSystem& sys, DsaKind kind, DsaScope scope, double eta) {
  DsaAssembler asmb(sys, kind, scope, eta);
  asmb.volume_terms();
  asmb.all_faces();
  DsaMatrix out;
  out.kind = kind;
  out.scope = scope;
  out.dof_map = std::move(asmb.dof_map);
  out.matrix = csr_from_triplets(out.dof_map.size(), out.dof_map.size(), std::move(asmb.trips));
  return out;
}

SparseMatrixCSR assemble_f0_presummed(const TransportSystem& sys) {
  const StructuredMesh& mesh = sys.space.mesh;
  const std::size_t p = sys.space.order;
  const std::size_t nn = p + 1;
  const std::size_t n_loc = sys.space.dofs_per_element();
  const double hx = mesh.hx, hy = mesh.hy;
  const double inv8pi = 1.0 / (8.0 * std::numbers::pi);
  double sxp, sxn, syp, syn;
  angular_half_sums(sys.quad, 0, sxp, sxn);
  angular_half_sums(sys.quad, 1, syp, syn);
  const double kx = inv8pi * (sxp + sxn);
  const double ky = inv8pi * (syp + syn);

  std::vector<Triplet> trips;
  for (std::size_t j = 0; j < mesh.ny; ++j) {
    for (std::size_t i = 1; i < mesh.nx; ++i) {
      const std::size_t em = mesh.element_id(i - 1, j) * n_loc;
      const std::size_t ep = mesh.element_id(i, j) * n_loc;
      for (std::size_t b = 0; b < nn; ++b) {
        for (std::size_t dd = 0; dd < nn; ++dd) {
          const double v = kx * hy * sys.m1(b, dd);
          trips.push_back({em + b * nn + p, em + dd * nn + p, v});
          trips.push_back({em + b * nn + p, ep + dd * nn + 0, -v});
          trips.push_back({ep + b * nn + 0, em + dd * nn + p, -v});
          trips.push_back({ep + b * nn + 0, ep + dd * nn + 0, v});
        }
      }
    }
  }
  for (std::size_t j = 1; j < mesh.ny; ++j) {
    for (std::size_t i = 0; i < mesh.nx; ++i) {
      const std::size_t em = mesh.element_id(i, j - 1) * n_loc;
      const std::size_t ep = mesh.element_id(i, j) * n_loc;
      for (std::size_t a = 0; a < nn; ++a) {
        for (std::size_t c = 0; c < nn; ++c) {
          const double v = ky * hx * sys.m1(a, c);
          trips.push_back({em + p * nn + a, em + p * nn + c, v});
          trips.push_back({em + p * nn + a, ep + 0 * nn + c, -v});
          trips.push_back({ep + 0 * nn + a, em + p * nn + c, -v});
          trips.push_back({ep + 0 * nn + a, ep + 0 * nn + c, v});
        }
      }
    }
  }
  for (std::size_t j = 0; j < mesh.ny; ++j) {
    for (const std::size_t i : {std::size_t{0}, mesh.nx - 1}) {
      const std::size_t layer = (i == 0) ? 0 : p;
      const std::size_t e = mesh.element_id(i, j) * n_loc;
      for (std::size_t b = 0; b < nn; ++b)
        for (std::size_t dd = 0; dd < nn; ++dd)
          trips.push_back({e + b * nn + layer, e + dd * nn + layer, kx * hy * sys.m1(b, dd)});
      if (mesh.nx == 1) break;
    }
  }
  for (std::size_t i = 0; i < mesh.nx; ++i) {
    for (const std::size_t j : {std::size_t{0}, mesh.ny - 1}) {
      const std::size_t layer = (j == 0) ? 0 : p;
      const std::size_t e = mesh.element_id(i, j) * n_loc;
      for (std::size_t a = 0; a < nn; ++a)
        for (std::size_t c = 0; c < nn; ++c)
          trips.push_back({e + layer * nn + a, e + layer * nn + c, ky * hx * sys.m1(a, c)});
      if (mesh.ny == 1) break;
    }
  }
  return csr_from_triplets(sys.n_dofs(), sys.n_dofs(), std::move(trips));
}

} // namespace snkit
