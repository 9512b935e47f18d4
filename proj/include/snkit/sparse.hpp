#ifndef SNKIT_SPARSE_HPP
#define SNKIT_SPARSE_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace snkit {

using Vector = std::vector<double>;

/// Compressed sparse row matrix in canonical form: column indices strictly
/// increasing within each row, no NaN entries stored.
struct SparseMatrixCSR {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr;  // length n_rows+1, nondecreasing
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// Value at (i, j), zero if not stored. O(log nnz_row).
  double at(std::size_t i, std::size_t j) const;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Row-major dense matrix. Used for element-local blocks and LU factors.
struct DenseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> values;  // n_rows * n_cols

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : n_rows(r), n_cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }
};

/// Builds a CSR matrix from an unordered triplet list. Duplicate (row, col)
/// entries are summed in their original relative order, so the result is
/// deterministic for a fixed input sequence.
SparseMatrixCSR csr_from_triplets(std::size_t n_rows, std::size_t n_cols,
                                  std::vector<Triplet> triplets);

SparseMatrixCSR csr_identity(std::size_t n);

/// y = A x with deterministic per-row summation in ascending column order.
Vector spmv(const SparseMatrixCSR& a, std::span<const double> x);

SparseMatrixCSR csr_transpose(const SparseMatrixCSR& a);
SparseMatrixCSR csr_add(const SparseMatrixCSR& a, const SparseMatrixCSR& b);
SparseMatrixCSR csr_matmul(const SparseMatrixCSR& a, const SparseMatrixCSR& b);
SparseMatrixCSR csr_scale(const SparseMatrixCSR& a, double s);

/// Principal submatrix A[rows, rows] with columns reindexed to the subset.
/// `rows` must be sorted, unique and within range; A must be square.
SparseMatrixCSR extract_principal_submatrix(const SparseMatrixCSR& a,
                                            std::span<const std::size_t> rows);

DenseMatrix csr_to_dense(const SparseMatrixCSR& a);

/// Matrix Market coordinate format, real general, 1-based indices.
void write_matrix_market(const SparseMatrixCSR& a, std::ostream& os);
void write_matrix_market(const SparseMatrixCSR& a, const std::string& path);
SparseMatrixCSR read_matrix_market(std::istream& is);
SparseMatrixCSR read_matrix_market(const std::string& path);

// Small dense/vector helpers shared across the solver stack.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

} // namespace snkit

#endif
