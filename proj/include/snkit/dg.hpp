#ifndef SNKIT_DG_HPP
#define SNKIT_DG_HPP

#include <span>
#include <vector>

#include "snkit/dense_lu.hpp"
#include "snkit/problem.hpp"
#include "snkit/quadrature.hpp"
#include "snkit/sparse.hpp"

namespace snkit {

/// Nodal tensor-product DG space on a structured quad mesh: Lagrange basis on
/// (p+1)^2 Gauss-Lobatto points per element, element-contiguous numbering
/// with local index b*(p+1)+a for node (a, b).
struct DGSpace {
  StructuredMesh mesh;
  std::size_t order = 2;  // p in {1, 2, 3, 4}

  std::size_t nodes_per_dim() const { return order + 1; }
  std::size_t dofs_per_element() const { return (order + 1) * (order + 1); }
  std::size_t n_dofs() const { return mesh.n_elements() * dofs_per_element(); }
};

DGSpace make_dg_space(const StructuredMesh& mesh, std::size_t order);

/// Per-ordinate upwind DG transport operators L_d = Omega_d . G + F^(d) +
/// Sigma_t, kept in element-block form for sweeping, plus the coefficient
/// mass matrices. Immutable after assembly.
struct TransportSystem {
  DGSpace space;
  AngularQuadrature quad;
  CoefficientField field;
  BoundarySource bc;
  DenseMatrix eddington;  // 3x3 discrete second-moment tensor

  // 1D reference operators on [0,1]: mass, convection (int l_a l_c'),
  // stiffness (int l_a' l_c'); shape values/derivatives at the face
  // quadrature points.
  DenseMatrix m1, c1, k1;
  Vector qpoints, qweights;      // p+2 Gauss-Legendre points on [0,1]
  DenseMatrix shape_at_q;        // [point][node]
  DenseMatrix dshape_at_q;       // [point][node]

  // sigma_t takes few distinct values (piecewise-constant materials); the
  // element diagonal blocks are factored once per (ordinate, value) pair.
  std::vector<std::size_t> sigma_class;  // per element
  Vector class_sigma_t;
  std::vector<LUFactors> block_lu;       // [d * n_classes + class]

  SparseMatrixCSR scatter_mass;  // coefficient sigma_s/(4 pi)
  SparseMatrixCSR sigma_t_mass;
  SparseMatrixCSR sigma_a_mass;

  std::size_t n_dofs() const { return space.n_dofs(); }
};

TransportSystem assemble_transport(const DGSpace& space, const AngularQuadrature& quad,
                                   const CoefficientField& field, const BoundarySource& bc);

/// Exact solve of L_d x = rhs by a wavefront sweep: elements visited in
/// lexicographic order oriented by the signs of Omega_d, each (p+1)^2 block
/// solved with its precomputed LU factor.
Vector sweep_solve(const TransportSystem& sys, std::size_t d, std::span<const double> rhs);

/// Element visit order of the sweep for a direction; every element appears
/// after its upwind neighbors.
std::vector<std::size_t> sweep_element_order(const StructuredMesh& mesh, double omega_x,
                                             double omega_y);

/// Load vector q^(d) + q_inc^(d): volumetric source plus incident flux on
/// the boundary faces with n . Omega_d < 0.
Vector ordinate_rhs(const TransportSystem& sys, std::size_t d);

/// Matrix-free action of the scalar-flux operator
///   S phi = phi - sum_d w_d L_d^{-1} Sigma_s phi,
/// one sweep per ordinate, summed in ascending d.
Vector schur_apply(const TransportSystem& sys, std::span<const double> phi);

/// b = sum_d w_d L_d^{-1} (q^(d) + q_inc^(d)).
Vector schur_rhs(const TransportSystem& sys);

/// Assembles L_d as a CSR matrix (oracle checks, export, debugging).
SparseMatrixCSR assemble_ordinate_matrix(const TransportSystem& sys, std::size_t d);

/// Upwind jump penalty face matrix of a single ordinate:
/// v^T F u = sum_faces int (1/2) |Omega_d . n| [[u]] [[v]] dS.
SparseMatrixCSR assemble_ordinate_jump_matrix(const TransportSystem& sys, std::size_t d);

enum class DsaKind { SIP, NIP, MNIP };
enum class DsaScope { Full, ThickOnly };

struct DsaMatrix {
  DsaKind kind = DsaKind::NIP;
  DsaScope scope = DsaScope::Full;
  SparseMatrixCSR matrix;
  std::vector<std::size_t> dof_map;  // row/col -> global dof
};

/// Interior-penalty diffusion operators used for DSA:
///   SIP : F0 + G^T I Sigma_t^-1 G + F1^T Sigma_t^-1 G + G^T Sigma_t^-1 F1 + Sigma_a
///   NIP : F0 + (1/3) G^T Sigma_t^-1 G + F1^T Sigma_t^-1 G + Sigma_a
///   mNIP: NIP with the penalty coefficient scaled by max(c(p)/(sigma_t h), 1)
///         evaluated on the upwind side per ordinate and integration point,
///         c(p) = 0.1 p (p+1).
/// ThickOnly restricts assembly to elements with sigma_s >= eta and equals
/// the thick principal submatrix of the Full operator entry for entry.
/// Throws VoidInScopeError when a required sigma_t vanishes.
DsaMatrix assemble_dsa(const TransportSystem& sys, DsaKind kind, DsaScope scope, double eta);

/// Angular pre-sum of the jump penalty, (1/4 pi) sum_d w_d F_jump^(d),
/// assembled in one pass with the summed angular coefficient.
SparseMatrixCSR assemble_f0_presummed(const TransportSystem& sys);

/// Penalty scaling constant c(p) = 0.1 p (p+1) of the modified penalty term.
double mnip_penalty_constant(std::size_t p);

} // namespace snkit

#endif
