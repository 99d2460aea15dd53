#pragma once

#include <cstddef>
#include <vector>

#include "nn/dense_matrix.hpp"
#include "nn/errors.hpp"

namespace nn {

/// Compressed-sparse-row matrix.
///
/// Canonical form: row_ptr[0] = 0, row_ptr[rows] = nnz, column indices
/// strictly increasing within each row, no explicitly stored zeros.
/// build() sorts, merges duplicate coordinates by summation and drops
/// exact zeros, so any triplet soup yields the canonical form.
class SparseMatrixCsr {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    Scalar value;
  };

  SparseMatrixCsr() = default;

  static SparseMatrixCsr build(std::size_t rows, std::size_t cols,
                               std::vector<Triplet> triplets);

  static SparseMatrixCsr identity(std::size_t n);

  /// Lossless dense copy (test oracle path and small-scale diagnostics).
  DenseMatrix densify() const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool square() const { return rows_ == cols_; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<Scalar>& values() const { return values_; }

  /// Sum of stored diagonal entries.
  Scalar trace() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<Scalar> values_;
};

}  // namespace nn
