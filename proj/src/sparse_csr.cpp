#include "nn/sparse_csr.hpp"

#include <algorithm>

namespace nn {

SparseMatrixCsr SparseMatrixCsr::build(std::size_t rows, std::size_t cols,
                                       std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols)
      throw ShapeError("SparseMatrixCsr: triplet index out of bounds");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrixCsr m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);

  std::vector<Triplet> merged;
  merged.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }

  for (const auto& t : merged) {
    if (t.value == Scalar{0.0, 0.0}) continue;  // canonical: no stored zeros
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrixCsr SparseMatrixCsr::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, Scalar{1.0, 0.0}});
  return build(n, n, std::move(t));
}

DenseMatrix SparseMatrixCsr::densify() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      d(r, col_idx_[k]) = values_[k];
  return d;
}

Scalar SparseMatrixCsr::trace() const {
  Scalar t{0.0, 0.0};
  for (std::size_t r = 0; r < rows_ && r < cols_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (col_idx_[k] == r) t += values_[k];
  return t;
}

}  // namespace nn
