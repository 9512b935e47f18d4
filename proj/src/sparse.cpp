#include "snkit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "snkit/errors.hpp"

namespace snkit {

double SparseMatrixCSR::at(std::size_t i, std::size_t j) const {
  auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

SparseMatrixCSR csr_from_triplets(std::size_t n_rows, std::size_t n_cols,
                                  std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols)
      throw UsageError("csr_from_triplets: index (" + std::to_string(t.row) + ", " +
                       std::to_string(t.col) + ") out of range");
    if (std::isnan(t.value)) throw UsageError("csr_from_triplets: NaN value at (" +
                                              std::to_string(t.row) + ", " +
                                              std::to_string(t.col) + ")");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrixCSR m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_ptr.assign(n_rows + 1, 0);
  m.col_idx.reserve(triplets.size());
  m.values.reserve(triplets.size());
  std::size_t k = 0;
  while (k < triplets.size()) {
    const std::size_t r = triplets[k].row;
    const std::size_t c = triplets[k].col;
    double sum = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
      sum += triplets[k].value;
      ++k;
    }
    m.col_idx.push_back(c);
    m.values.push_back(sum);
    m.row_ptr[r + 1] = m.col_idx.size();
  }
  for (std::size_t r = 0; r < n_rows; ++r)
    m.row_ptr[r + 1] = std::max(m.row_ptr[r + 1], m.row_ptr[r]);
  return m;
}

SparseMatrixCSR csr_identity(std::size_t n) {
  SparseMatrixCSR m;
  m.n_rows = m.n_cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.values.assign(n, 1.0);
  std::iota(m.row_ptr.begin(), m.row_ptr.end(), std::size_t{0});
  std::iota(m.col_idx.begin(), m.col_idx.end(), std::size_t{0});
  return m;
}

Vector spmv(const SparseMatrixCSR& a, std::span<const double> x) {
  if (x.size() != a.n_cols)
    throw UsageError("spmv: vector length " + std::to_string(x.size()) +
                     " != n_cols " + std::to_string(a.n_cols));
  Vector y(a.n_rows, 0.0);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    double s = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      s += a.values[k] * x[a.col_idx[k]];
    y[i] = s;
  }
  return y;
}

SparseMatrixCSR csr_transpose(const SparseMatrixCSR& a) {
  SparseMatrixCSR t;
  t.n_rows = a.n_cols;
  t.n_cols = a.n_rows;
  t.row_ptr.assign(a.n_cols + 1, 0);
  t.col_idx.resize(a.nnz());
  t.values.resize(a.nnz());
  for (std::size_t k = 0; k < a.nnz(); ++k) ++t.row_ptr[a.col_idx[k] + 1];
  for (std::size_t c = 0; c < a.n_cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t pos = next[a.col_idx[k]]++;
      t.col_idx[pos] = i;
      t.values[pos] = a.values[k];
    }
  }
  return t;
}

SparseMatrixCSR csr_add(const SparseMatrixCSR& a, const SparseMatrixCSR& b) {
  if (a.n_rows != b.n_rows || a.n_cols != b.n_cols)
    throw UsageError("csr_add: dimension mismatch");
  SparseMatrixCSR c;
  c.n_rows = a.n_rows;
  c.n_cols = a.n_cols;
  c.row_ptr.assign(a.n_rows + 1, 0);
  c.col_idx.reserve(a.nnz() + b.nnz());
  c.values.reserve(a.nnz() + b.nnz());
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    std::size_t ka = a.row_ptr[i], kb = b.row_ptr[i];
    const std::size_t ea = a.row_ptr[i + 1], eb = b.row_ptr[i + 1];
    while (ka < ea || kb < eb) {
      std::size_t col;
      double val;
      if (kb >= eb || (ka < ea && a.col_idx[ka] < b.col_idx[kb])) {
        col = a.col_idx[ka];
        val = a.values[ka++];
      } else if (ka >= ea || b.col_idx[kb] < a.col_idx[ka]) {
        col = b.col_idx[kb];
        val = b.values[kb++];
      } else {
        col = a.col_idx[ka];
        val = a.values[ka++] + b.values[kb++];
      }
      c.col_idx.push_back(col);
      c.values.push_back(val);
    }
    c.row_ptr[i + 1] = c.col_idx.size();
  }
  return c;
}

SparseMatrixCSR csr_matmul(const SparseMatrixCSR& a, const SparseMatrixCSR& b) {
  if (a.n_cols != b.n_rows) throw UsageError("csr_matmul: dimension mismatch");
  SparseMatrixCSR c;
  c.n_rows = a.n_rows;
  c.n_cols = b.n_cols;
  c.row_ptr.assign(a.n_rows + 1, 0);

  // Dense accumulator per row; deterministic since contributions are added
  // in ascending k (A row order) and emitted in ascending column order.
  std::vector<double> acc(b.n_cols, 0.0);
  std::vector<std::size_t> marker(b.n_cols, static_cast<std::size_t>(-1));
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    cols.clear();
    for (std::size_t ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
      const std::size_t j = a.col_idx[ka];
      const double av = a.values[ka];
      for (std::size_t kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
        const std::size_t col = b.col_idx[kb];
        if (marker[col] != i) {
          marker[col] = i;
          acc[col] = 0.0;
          cols.push_back(col);
        }
        acc[col] += av * b.values[kb];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (const std::size_t col : cols) {
      c.col_idx.push_back(col);
      c.values.push_back(acc[col]);
    }
    c.row_ptr[i + 1] = c.col_idx.size();
  }
  return c;
}

SparseMatrixCSR csr_scale(const SparseMatrixCSR& a, double s) {
  SparseMatrixCSR c = a;
  for (double& v : c.values) v *= s;
  return c;
}

SparseMatrixCSR extract_principal_submatrix(const SparseMatrixCSR& a,
                                            std::span<const std::size_t> rows) {
  if (a.n_rows != a.n_cols) throw UsageError("extract_principal_submatrix: matrix not square");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= a.n_rows)
      throw UsageError("extract_principal_submatrix: row index " + std::to_string(rows[k]) +
                       " out of range");
    if (k > 0 && rows[k] <= rows[k - 1])
      throw UsageError("extract_principal_submatrix: rows must be sorted and unique");
  }
  std::vector<std::size_t> inverse(a.n_rows, static_cast<std::size_t>(-1));
  for (std::size_t k = 0; k < rows.size(); ++k) inverse[rows[k]] = k;

  SparseMatrixCSR s;
  s.n_rows = s.n_cols = rows.size();
  s.row_ptr.assign(rows.size() + 1, 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const std::size_t jc = inverse[a.col_idx[p]];
      if (jc == static_cast<std::size_t>(-1)) continue;
      s.col_idx.push_back(jc);
      s.values.push_back(a.values[p]);
    }
    s.row_ptr[k + 1] = s.col_idx.size();
  }
  return s;
}

DenseMatrix csr_to_dense(const SparseMatrixCSR& a) {
  DenseMatrix d(a.n_rows, a.n_cols);
  for (std::size_t i = 0; i < a.n_rows; ++i)
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      d(i, a.col_idx[k]) = a.values[k];
  return d;
}

void write_matrix_market(const SparseMatrixCSR& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", i + 1, a.col_idx[k] + 1, a.values[k]);
      os << buf;
    }
  }
}

void write_matrix_market(const SparseMatrixCSR& a, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  write_matrix_market(a, os);
}

SparseMatrixCSR read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("matrix market: empty stream");
  if (line.rfind("%%MatrixMarket", 0) != 0 ||
      line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos)
    throw ParseError("matrix market: unsupported header '" + line + "'");
  if (line.find("general") == std::string::npos)
    throw ParseError("matrix market: only 'general' symmetry supported");
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream hdr(line);
  std::size_t n_rows = 0, n_cols = 0, nnz = 0;
  if (!(hdr >> n_rows >> n_cols >> nnz)) throw ParseError("matrix market: bad size line");
  std::vector<Triplet> trips;
  trips.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw ParseError("matrix market: truncated entry list");
    if (i == 0 || j == 0) throw ParseError("matrix market: indices are 1-based");
    trips.push_back({i - 1, j - 1, v});
  }
  return csr_from_triplets(n_rows, n_cols, std::move(trips));
}

SparseMatrixCSR read_matrix_market(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open '" + path + "'");
  return read_matrix_market(is);
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (const double v : x) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

} // namespace snkit
