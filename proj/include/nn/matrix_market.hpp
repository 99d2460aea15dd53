#pragma once

#include <iosfwd>
#include <string>

#include "nn/dense_matrix.hpp"
#include "nn/sparse_csr.hpp"

namespace nn::mm {

/// Matrix Market I/O.  Dense matrices use the array format, sparse the
/// coordinate format; values are written with 17 significant digits so a
/// write/read round trip is bit-exact.  Readers accept real, integer and
/// complex fields with general, symmetric or hermitian symmetry.

DenseMatrix read_dense(std::istream& in);
SparseMatrixCsr read_sparse(std::istream& in);

/// Reads either format; coordinate files are densified.
DenseMatrix read_dense_file(const std::string& path);
/// Requires a coordinate file.
SparseMatrixCsr read_sparse_file(const std::string& path);
/// Peeks at the banner: true when the file is in coordinate format.
bool file_is_coordinate(const std::string& path);

void write_dense(std::ostream& out, const DenseMatrix& m);
void write_sparse(std::ostream& out, const SparseMatrixCsr& m);

void write_dense_file(const std::string& path, const DenseMatrix& m);
void write_sparse_file(const std::string& path, const SparseMatrixCsr& m);

/// Write-then-rename so readers never observe a torn file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace nn::mm
