#include "snkit/amg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snkit/errors.hpp"

namespace snkit {

namespace {

// Strength graph on the symmetrized magnitude pattern: j is a strong
// neighbor of i if (|a_ij| + |a_ji|)/2 >= theta * max_k (|a_ik| + |a_ki|)/2.
struct StrengthGraph {
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> cols;
};

StrengthGraph build_strength(const SparseMatrixCSR& a, const SparseMatrixCSR& at, double theta) {
  const std::size_t n = a.n_rows;
  StrengthGraph s;
  s.row_ptr.assign(n + 1, 0);

  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    cols.clear();
    vals.clear();
    std::size_t ka = a.row_ptr[i], kt = at.row_ptr[i];
    const std::size_t ea = a.row_ptr[i + 1], et = at.row_ptr[i + 1];
    while (ka < ea || kt < et) {
      std::size_t c;
      double v;
      if (kt >= et || (ka < ea && a.col_idx[ka] < at.col_idx[kt])) {
        c = a.col_idx[ka];
        v = std::abs(a.values[ka++]);
      } else if (ka >= ea || at.col_idx[kt] < a.col_idx[ka]) {
        c = at.col_idx[kt];
        v = std::abs(at.values[kt++]);
      } else {
        c = a.col_idx[ka];
        v = std::abs(a.values[ka++]) + std::abs(at.values[kt++]);
      }
      if (c == i) continue;
      cols.push_back(c);
      vals.push_back(0.5 * v);
    }
    double m = 0.0;
    for (const double v : vals) m = std::max(m, v);
    const double cutoff = theta * m;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (m > 0.0 && vals[k] >= cutoff && vals[k] > 0.0) s.cols.push_back(cols[k]);
    }
    s.row_ptr[i + 1] = s.cols.size();
  }
  return s;
}

StrengthGraph transpose_graph(const StrengthGraph& s, std::size_t n) {
  StrengthGraph t;
  t.row_ptr.assign(n + 1, 0);
  t.cols.resize(s.cols.size());
  for (const std::size_t c : s.cols) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < n; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) t.cols[next[s.cols[k]]++] = i;
  return t;
}

enum class PointKind : unsigned char { Undecided, Coarse, Fine };

// Ruge-Stuben first pass: greedy selection by the number of points that
// strongly depend on a candidate, with the classic weight updates. The bucket
// queue holds lazily invalidated copies; an entry is live only if its stored
// lambda still matches.
std::vector<PointKind> coarsen(const StrengthGraph& s, const StrengthGraph& st, std::size_t n) {
  std::vector<PointKind> kind(n, PointKind::Undecided);
  std::vector<long> lambda(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    lambda[i] = static_cast<long>(st.row_ptr[i + 1] - st.row_ptr[i]);

  std::vector<std::vector<std::size_t>> buckets;
  std::size_t top = 0;  // one past the highest occupied bucket
  auto push = [&](std::size_t j) {
    const std::size_t lv = static_cast<std::size_t>(lambda[j]);
    if (lv >= buckets.size()) buckets.resize(lv + 1);
    buckets[lv].push_back(j);
    top = std::max(top, lv + 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda[i] == 0)
      kind[i] = PointKind::Fine;  // nothing depends on it; isolated or weak
    else
      push(i);
  }

  while (true) {
    std::size_t pick = n;
    while (top > 0) {
      auto& bucket = buckets[top - 1];
      while (!bucket.empty()) {
        const std::size_t cand = bucket.back();
        if (kind[cand] == PointKind::Undecided &&
            lambda[cand] == static_cast<long>(top - 1)) {
          pick = cand;
          break;
        }
        bucket.pop_back();  // stale or already decided
      }
      if (pick != n) break;
      --top;
    }
    if (pick == n) break;
    buckets[top - 1].pop_back();

    kind[pick] = PointKind::Coarse;
    // Points that strongly depend on the new C point become F; their other
    // strong influences gain weight.
    for (std::size_t k = st.row_ptr[pick]; k < st.row_ptr[pick + 1]; ++k) {
      const std::size_t f = st.cols[k];
      if (kind[f] != PointKind::Undecided) continue;
      kind[f] = PointKind::Fine;
      for (std::size_t k2 = s.row_ptr[f]; k2 < s.row_ptr[f + 1]; ++k2) {
        const std::size_t j = s.cols[k2];
        if (kind[j] == PointKind::Undecided) {
          ++lambda[j];
          push(j);
        }
      }
    }
    for (std::size_t k = s.row_ptr[pick]; k < s.row_ptr[pick + 1]; ++k) {
      const std::size_t j = s.cols[k];
      if (kind[j] == PointKind::Undecided && lambda[j] > 0) {
        --lambda[j];
        if (lambda[j] > 0) push(j);
      }
    }
  }
  for (auto& k : kind)
    if (k == PointKind::Undecided) k = PointKind::Fine;

  // Every F point with strong connections must see at least one C point.
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] != PointKind::Fine) continue;
    bool has_strong = false, has_coarse = false;
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      has_strong = true;
      if (kind[s.cols[k]] == PointKind::Coarse) {
        has_coarse = true;
        break;
      }
    }
    if (has_strong && !has_coarse) kind[i] = PointKind::Coarse;
  }
  return kind;
}

// Direct interpolation with separate treatment of negative and positive
// connections; positive row sums without a positive C connection are lumped
// into the diagonal.
SparseMatrixCSR build_interpolation(const SparseMatrixCSR& a, const StrengthGraph& s,
                                    const std::vector<PointKind>& kind,
                                    std::size_t n_coarse) {
  const std::size_t n = a.n_rows;
  std::vector<std::size_t> coarse_id(n, 0);
  {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (kind[i] == PointKind::Coarse) coarse_id[i] = c++;
  }

  std::vector<Triplet> trips;
  std::vector<char> strong_mark(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] == PointKind::Coarse) {
      trips.push_back({i, coarse_id[i], 1.0});
      continue;
    }
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) strong_mark[s.cols[k]] = 1;

    double diag = 0.0;
    double neg_all = 0.0, pos_all = 0.0;
    double neg_c = 0.0, pos_c = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t j = a.col_idx[k];
      const double v = a.values[k];
      if (j == i) {
        diag = v;
        continue;
      }
      const bool strong_c = strong_mark[j] && kind[j] == PointKind::Coarse;
      if (v < 0.0) {
        neg_all += v;
        if (strong_c) neg_c += v;
      } else {
        pos_all += v;
        if (strong_c) pos_c += v;
      }
    }

    double diag_eff = diag;
    double alpha = 0.0, beta = 0.0;
    if (neg_c != 0.0) alpha = neg_all / neg_c;
    if (pos_c != 0.0) {
      beta = pos_all / pos_c;
    } else {
      diag_eff += pos_all;  // no positive C connection: lump into diagonal
    }

    if (diag_eff != 0.0) {
      for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
        const std::size_t j = a.col_idx[k];
        if (j == i || !strong_mark[j] || kind[j] != PointKind::Coarse) continue;
        const double v = a.values[k];
        const double w = (v < 0.0) ? -alpha * v / diag_eff : -beta * v / diag_eff;
        if (w != 0.0) trips.push_back({i, coarse_id[j], w});
      }
    }
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) strong_mark[s.cols[k]] = 0;
  }
  return csr_from_triplets(n, n_coarse, std::move(trips));
}

Vector smoother_diagonal(const SparseMatrixCSR& a, AmgSmoother sm) {
  Vector d(a.n_rows, 0.0);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    double l1 = 0.0, diag = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      l1 += std::abs(a.values[k]);
      if (a.col_idx[k] == i) diag = a.values[k];
    }
    d[i] = (sm == AmgSmoother::WeightedJacobi) ? l1 : diag;
  }
  return d;
}

void smooth_jacobi(const AmgLevel& lvl, Vector& x, std::span<const double> rhs) {
  const SparseMatrixCSR& a = lvl.a;
  Vector ax(a.n_rows, 0.0);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    double s = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      s += a.values[k] * x[a.col_idx[k]];
    ax[i] = s;
  }
  for (std::size_t i = 0; i < a.n_rows; ++i) x[i] += (rhs[i] - ax[i]) / lvl.smoother_diag[i];
}

void smooth_gs(const AmgLevel& lvl, Vector& x, std::span<const double> rhs, bool forward) {
  const SparseMatrixCSR& a = lvl.a;
  const std::size_t n = a.n_rows;
  for (std::size_t ii = 0; ii < n; ++ii) {
    const std::size_t i = forward ? ii : n - 1 - ii;
    double s = rhs[i];
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t j = a.col_idx[k];
      if (j != i) s -= a.values[k] * x[j];
    }
    x[i] = s / lvl.smoother_diag[i];
  }
}

void vcycle(const AmgHierarchy& h, std::size_t level, std::span<const double> rhs, Vector& x) {
  const AmgLevel& lvl = h.levels[level];
  if (level + 1 == h.levels.size()) {
    x = lu_solve(h.coarse_lu, rhs);
    return;
  }
  x.assign(lvl.a.n_rows, 0.0);
  const bool jacobi = h.config.smoother == AmgSmoother::WeightedJacobi;
  for (std::size_t s = 0; s < h.config.pre_sweeps; ++s) {
    if (jacobi)
      smooth_jacobi(lvl, x, rhs);
    else
      smooth_gs(lvl, x, rhs, /*forward=*/true);
  }

  Vector ax = spmv(lvl.a, x);
  Vector res(lvl.a.n_rows);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = rhs[i] - ax[i];
  Vector coarse_rhs = spmv(lvl.r, res);

  Vector coarse_x;
  vcycle(h, level + 1, coarse_rhs, coarse_x);
  Vector corr = spmv(lvl.p, coarse_x);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += corr[i];

  for (std::size_t s = 0; s < h.config.post_sweeps; ++s) {
    if (jacobi)
      smooth_jacobi(lvl, x, rhs);
    else
      smooth_gs(lvl, x, rhs, /*forward=*/false);
  }
}

} // namespace

AmgHierarchy amg_setup(const SparseMatrixCSR& a, const AmgConfig& cfg) {
  if (a.n_rows != a.n_cols) throw AmgSetupError("amg_setup: matrix not square");
  if (!(cfg.strength_threshold > 0.0 && cfg.strength_threshold < 1.0))
    throw UsageError("amg_setup: strength_threshold must lie in (0, 1)");

  AmgHierarchy h;
  h.config = cfg;

  SparseMatrixCSR current = a;
  while (true) {
    for (std::size_t i = 0; i < current.n_rows; ++i) {
      if (current.at(i, i) == 0.0)
        throw AmgSetupError("amg_setup: zero diagonal in row " + std::to_string(i));
    }
    AmgLevel lvl;
    lvl.a = current;
    lvl.smoother_diag = smoother_diagonal(current, cfg.smoother);

    const bool at_bottom = current.n_rows <= cfg.min_coarse_size ||
                           h.levels.size() + 1 >= cfg.max_levels;
    if (at_bottom) {
      h.levels.push_back(std::move(lvl));
      break;
    }

    const SparseMatrixCSR at = csr_transpose(current);
    const StrengthGraph s = build_strength(current, at, cfg.strength_threshold);
    const StrengthGraph st = transpose_graph(s, current.n_rows);
    const std::vector<PointKind> kind = coarsen(s, st, current.n_rows);
    const std::size_t n_coarse =
        static_cast<std::size_t>(std::count(kind.begin(), kind.end(), PointKind::Coarse));
    if (n_coarse == 0 || n_coarse == current.n_rows) {
      // Nothing usefully coarsenable (e.g. a diagonal matrix); stop here.
      h.levels.push_back(std::move(lvl));
      break;
    }

    lvl.p = build_interpolation(current, s, kind, n_coarse);
    lvl.r = csr_transpose(lvl.p);
    SparseMatrixCSR coarse = csr_matmul(lvl.r, csr_matmul(current, lvl.p));
    h.levels.push_back(std::move(lvl));
    current = std::move(coarse);
  }

  h.coarse_lu = lu_factor(csr_to_dense(h.levels.back().a));
  return h;
}

Vector amg_apply(const AmgHierarchy& h, std::span<const double> r) {
  if (r.size() != h.levels.front().a.n_rows)
    throw UsageError("amg_apply: vector length mismatch");
  Vector x;
  vcycle(h, 0, r, x);
  return x;
}

void amg_smooth_once(const AmgHierarchy& h, std::size_t level, Vector& x,
                     std::span<const double> rhs, bool forward) {
  if (level >= h.levels.size()) throw UsageError("amg_smooth_once: level out of range");
  const AmgLevel& lvl = h.levels[level];
  if (x.size() != lvl.a.n_rows || rhs.size() != lvl.a.n_rows)
    throw UsageError("amg_smooth_once: vector length mismatch");
  if (h.config.smoother == AmgSmoother::WeightedJacobi)
    smooth_jacobi(lvl, x, rhs);
  else
    smooth_gs(lvl, x, rhs, forward);
}

std::string amg_diagnostics_json(const AmgHierarchy& h) {
  std::ostringstream os;
  const double fine_nnz = static_cast<double>(h.levels.front().a.nnz());
  double total_nnz = 0.0;
  os << "{\"levels\":[";
  for (std::size_t l = 0; l < h.levels.size(); ++l) {
    const auto& lvl = h.levels[l];
    total_nnz += static_cast<double>(lvl.a.nnz());
    if (l) os << ",";
    os << "{\"n\":" << lvl.a.n_rows << ",\"nnz\":" << lvl.a.nnz() << "}";
  }
  os << "],\"operator_complexity\":" << (fine_nnz > 0 ? total_nnz / fine_nnz : 0.0) << "}";
  return os.str();
}

} // namespace snkit
