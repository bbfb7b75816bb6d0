// Copyright 2026 The kgalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense and CSR sparse kernels for the graph models, together with the
// reverse-mode rule of every differentiable op. Everything is double
// precision; every kernel fixes its per-row summation order so results are
// independent of the thread count.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kgalign/common.hpp"

namespace kgalign {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    KGALIGN_CHECK(data_.size() == rows_ * cols_, "DenseMatrix: data size ", data_.size(),
                  " != ", rows_, "x", cols_);
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool operator==(const DenseMatrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Row-per-entity embedding table (graph, textual or fused).
using EmbeddingMatrix = DenseMatrix;

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Sorts the triplets and sums duplicate coordinates.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> trips) {
    for (const auto& t : trips)
      KGALIGN_CHECK(t.row < rows && t.col < cols, "SparseMatrix: entry (", t.row, ",", t.col,
                    ") outside ", rows, "x", cols);
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    for (std::size_t i = 0; i < trips.size();) {
      std::size_t j = i;
      double v = 0.0;
      while (j < trips.size() && trips[j].row == trips[i].row && trips[j].col == trips[i].col)
        v += trips[j++].value;
      m.col_idx_.push_back(trips[i].col);
      m.values_.push_back(v);
      ++m.row_ptr_[trips[i].row + 1];
      i = j;
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> row_ptr,
                               std::vector<std::uint64_t> col_idx, std::vector<double> values) {
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(row_ptr.begin(), row_ptr.end());
    m.col_idx_.assign(col_idx.begin(), col_idx.end());
    m.values_ = std::move(values);
    m.validate();
    return m;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  // Structural and numeric invariants; throws on violation.
  void validate() const {
    KGALIGN_CHECK(row_ptr_.size() == rows_ + 1, "SparseMatrix: row_ptr length ", row_ptr_.size());
    KGALIGN_CHECK(row_ptr_[0] == 0, "SparseMatrix: row_ptr[0] != 0");
    KGALIGN_CHECK(row_ptr_[rows_] == col_idx_.size() && col_idx_.size() == values_.size(),
                  "SparseMatrix: nnz mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
      KGALIGN_CHECK(row_ptr_[r] <= row_ptr_[r + 1], "SparseMatrix: row_ptr decreasing at ", r);
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        KGALIGN_CHECK(col_idx_[k] < cols_, "SparseMatrix: column ", col_idx_[k], " out of range");
        KGALIGN_CHECK(k == row_ptr_[r] || col_idx_[k - 1] < col_idx_[k],
                      "SparseMatrix: columns not strictly increasing in row ", r);
        KGALIGN_CHECK(std::isfinite(values_[k]), "SparseMatrix: non-finite value");
      }
    }
  }

  SparseMatrix transpose() const {
    SparseMatrix t(cols_, rows_);
    t.col_idx_.resize(nnz());
    t.values_.resize(nnz());
    for (std::size_t c : col_idx_) ++t.row_ptr_[c + 1];
    for (std::size_t c = 0; c < cols_; ++c) t.row_ptr_[c + 1] += t.row_ptr_[c];
    std::vector<std::size_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    // Rows are visited in ascending order, so columns of the transpose come
    // out sorted.
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        std::size_t dst = next[col_idx_[k]]++;
        t.col_idx_[dst] = r;
        t.values_[dst] = values_[k];
      }
    }
    return t;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) = values_[k];
    return d;
  }

  double at(std::size_t r, std::size_t c) const {
    auto b = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    auto e = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(b, e, c);
    return (it != e && *it == c) ? values_[static_cast<std::size_t>(it - col_idx_.begin())] : 0.0;
  }

  bool operator==(const SparseMatrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// D̃^{-1/2} (A + I) D̃^{-1/2} for an undirected, unweighted graph. Edge
// direction is ignored, multi-edges collapse and self loops merge into the
// added identity.
inline SparseMatrix normalize_adjacency(const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                        std::size_t n) {
  KGALIGN_CHECK(n > 0, "normalize_adjacency: empty graph");
  std::vector<std::pair<std::size_t, std::size_t>> sym;
  sym.reserve(2 * edges.size() + n);
  for (auto [i, j] : edges) {
    KGALIGN_CHECK(i < n && j < n, "normalize_adjacency: edge (", i, ",", j, ") out of range for n=", n);
    if (i == j) continue;
    sym.emplace_back(i, j);
    sym.emplace_back(j, i);
  }
  for (std::size_t i = 0; i < n; ++i) sym.emplace_back(i, i);
  std::sort(sym.begin(), sym.end());
  sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

  std::vector<double> degree(n, 0.0);
  for (auto [i, j] : sym) degree[i] += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<SparseMatrix::Triplet> trips;
  trips.reserve(sym.size());
  // inv_sqrt[i] * inv_sqrt[j] is commutative in IEEE arithmetic, so (i,j) and
  // (j,i) get bitwise identical values.
  for (auto [i, j] : sym) trips.push_back({i, j, inv_sqrt[i] * inv_sqrt[j]});
  return SparseMatrix::from_triplets(n, n, std::move(trips));
}

// S · D. Gradient: dD = Sᵀ · dOut (call spmm on the transpose).
inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
  KGALIGN_CHECK(s.cols() == d.rows(), "spmm: dimension mismatch ", s.rows(), "x", s.cols(), " * ",
                d.rows(), "x", d.cols());
  DenseMatrix out(s.rows(), d.cols());
  const std::size_t width = d.cols();
  const auto& rp = s.row_ptr();
  const auto& ci = s.col_idx();
  const auto& vals = s.values();
  std::size_t avg = s.rows() ? std::max<std::size_t>(1, s.nnz() / s.rows()) : 1;
  parallel_rows(s.rows(), avg * width, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      auto dst = out.row(r);
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
        const double v = vals[k];
        auto src = d.row(ci[k]);
        for (std::size_t c = 0; c < width; ++c) dst[c] += v * src[c];
      }
    }
  });
  return out;
}

// A · B.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  KGALIGN_CHECK(a.cols() == b.rows(), "matmul: dimension mismatch ", a.rows(), "x", a.cols(), " * ",
                b.rows(), "x", b.cols());
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols(), width = b.cols();
  parallel_rows(a.rows(), inner * width, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      auto dst = out.row(r);
      auto lhs = a.row(r);
      for (std::size_t k = 0; k < inner; ++k) {
        const double v = lhs[k];
        if (v == 0.0) continue;
        auto src = b.row(k);
        for (std::size_t c = 0; c < width; ++c) dst[c] += v * src[c];
      }
    }
  });
  return out;
}

// Aᵀ · B, without materializing the transpose.
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  KGALIGN_CHECK(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
  DenseMatrix out(a.cols(), b.cols());
  const std::size_t width = b.cols();
  parallel_rows(a.cols(), a.rows() * width, [&](std::size_t ib, std::size_t ie) {
    for (std::size_t k = 0; k < a.rows(); ++k) {
      auto lhs = a.row(k);
      auto src = b.row(k);
      for (std::size_t i = ib; i < ie; ++i) {
        const double v = lhs[i];
        if (v == 0.0) continue;
        auto dst = out.row(i);
        for (std::size_t c = 0; c < width; ++c) dst[c] += v * src[c];
      }
    }
  });
  return out;
}

// A · Bᵀ. B is small (a weight matrix) in every caller, so it is transposed
// once and the product runs through the row-streaming kernel.
inline DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  KGALIGN_CHECK(a.cols() == b.cols(), "matmul_nt: dimension mismatch");
  DenseMatrix bt(b.cols(), b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) bt(c, r) = b(r, c);
  return matmul(a, bt);
}

inline void add_row_bias(DenseMatrix& m, const DenseMatrix& bias) {
  KGALIGN_CHECK(bias.rows() == 1 && bias.cols() == m.cols(), "add_row_bias: bias shape");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += bias(0, c);
  }
}

inline DenseMatrix column_sums(const DenseMatrix& m) {
  DenseMatrix out(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += m(r, c);
  return out;
}

inline void axpy(double alpha, const DenseMatrix& x, DenseMatrix& y) {
  KGALIGN_CHECK(x.same_shape(y), "axpy: shape mismatch");
  auto& yd = y.data();
  const auto& xd = x.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += alpha * xd[i];
}

// --- activations -----------------------------------------------------------

inline DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

// Subgradient 0 at the kink.
inline DenseMatrix relu_backward(const DenseMatrix& pre, const DenseMatrix& grad_out) {
  KGALIGN_CHECK(pre.same_shape(grad_out), "relu_backward: shape mismatch");
  DenseMatrix g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(pre.data()[i] > 0.0)) g.data()[i] = 0.0;
  return g;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline DenseMatrix sigmoid(const DenseMatrix& x) {
  DenseMatrix y = x;
  for (double& v : y.data()) v = sigmoid(v);
  return y;
}

// Takes the forward output y = sigmoid(x).
inline DenseMatrix sigmoid_backward(const DenseMatrix& y, const DenseMatrix& grad_out) {
  KGALIGN_CHECK(y.same_shape(grad_out), "sigmoid_backward: shape mismatch");
  DenseMatrix g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = y.data()[i];
    g.data()[i] *= s * (1.0 - s);
  }
  return g;
}

// Zero rows pass through unchanged.
inline DenseMatrix l2_normalize_rows(const DenseMatrix& x) {
  DenseMatrix y = x;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    double ss = 0.0;
    for (double v : row) ss += v * v;
    if (ss == 0.0) continue;
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : row) v *= inv;
  }
  return y;
}

// dx = (dy - y·⟨y, dy⟩) / ‖x‖; identity on zero rows.
inline DenseMatrix l2_normalize_rows_backward(const DenseMatrix& x, const DenseMatrix& y,
                                              const DenseMatrix& grad_out) {
  KGALIGN_CHECK(x.same_shape(y) && x.same_shape(grad_out), "l2_normalize_rows_backward: shape mismatch");
  DenseMatrix g = grad_out;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    double ss = 0.0;
    for (double v : xr) ss += v * v;
    if (ss == 0.0) continue;
    const double norm = std::sqrt(ss);
    auto yr = y.row(r);
    auto gr = g.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < gr.size(); ++c) dot += yr[c] * gr[c];
    for (std::size_t c = 0; c < gr.size(); ++c) gr[c] = (gr[c] - yr[c] * dot) / norm;
  }
  return g;
}

// --- column blocks -----------------------------------------------------------

inline DenseMatrix concat_cols(const std::vector<const DenseMatrix*>& blocks) {
  KGALIGN_CHECK(!blocks.empty(), "concat_cols: no blocks");
  const std::size_t rows = blocks.front()->rows();
  std::size_t width = 0;
  for (const DenseMatrix* b : blocks) {
    KGALIGN_CHECK(b->rows() == rows, "concat_cols: row count mismatch");
    width += b->cols();
  }
  DenseMatrix out(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    auto dst = out.row(r);
    std::size_t off = 0;
    for (const DenseMatrix* b : blocks) {
      auto src = b->row(r);
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(off));
      off += b->cols();
    }
  }
  return out;
}

inline DenseMatrix slice_cols(const DenseMatrix& m, std::size_t begin, std::size_t width) {
  KGALIGN_CHECK(begin + width <= m.cols(), "slice_cols: out of range");
  DenseMatrix out(m.rows(), width);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(begin),
              src.begin() + static_cast<std::ptrdiff_t>(begin + width), out.row(r).begin());
  }
  return out;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

inline bool all_finite(const DenseMatrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

inline void write_dense(BinaryWriter& w, const DenseMatrix& m) {
  w.u64(m.rows());
  w.u64(m.cols());
  w.array(m.data());
}

inline DenseMatrix read_dense(BinaryReader& r) {
  std::size_t rows = r.u64(), cols = r.u64();
  auto data = r.array<double>();
  KGALIGN_CHECK(data.size() == rows * cols, r.source(), ": dense matrix size mismatch");
  return DenseMatrix(rows, cols, std::move(data));
}

inline void write_sparse(BinaryWriter& w, const SparseMatrix& m) {
  w.u64(m.rows());
  w.u64(m.cols());
  std::vector<std::uint64_t> rp(m.row_ptr().begin(), m.row_ptr().end());
  std::vector<std::uint64_t> ci(m.col_idx().begin(), m.col_idx().end());
  w.array(rp);
  w.array(ci);
  w.array(m.values());
}

inline SparseMatrix read_sparse(BinaryReader& r) {
  std::size_t rows = r.u64(), cols = r.u64();
  auto rp = r.array<std::uint64_t>();
  auto ci = r.array<std::uint64_t>();
  auto vals = r.array<double>();
  return SparseMatrix::from_csr(rows, cols, std::move(rp), std::move(ci), std::move(vals));
}

}  // namespace kgalign
