#include "nn/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "nn/errors.hpp"

namespace nn::mm {
namespace {

struct Banner {
  bool coordinate = false;
  enum { Real, Integer, Complex } field = Real;
  enum { General, Symmetric, Hermitian } symmetry = General;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Banner parse_banner(const std::string& line) {
  std::istringstream ss(line);
  std::string tag, object, format, field, symmetry;
  ss >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix")
    throw IoError("matrix market: missing %%MatrixMarket matrix banner");
  Banner b;
  const std::string fmt = lower(format);
  if (fmt == "coordinate")
    b.coordinate = true;
  else if (fmt == "array")
    b.coordinate = false;
  else
    throw IoError("matrix market: unsupported format '" + format + "'");
  const std::string fld = lower(field);
  if (fld == "real")
    b.field = Banner::Real;
  else if (fld == "integer")
    b.field = Banner::Integer;
  else if (fld == "complex")
    b.field = Banner::Complex;
  else
    throw IoError("matrix market: unsupported field '" + field + "'");
  const std::string sym = lower(symmetry);
  if (sym == "general")
    b.symmetry = Banner::General;
  else if (sym == "symmetric")
    b.symmetry = Banner::Symmetric;
  else if (sym == "hermitian")
    b.symmetry = Banner::Hermitian;
  else
    throw IoError("matrix market: unsupported symmetry '" + symmetry + "'");
  return b;
}

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return line;
  }
  throw IoError("matrix market: unexpected end of file");
}

Scalar read_value(std::istringstream& ss, const Banner& b) {
  double re = 0.0, im = 0.0;
  if (!(ss >> re)) throw IoError("matrix market: malformed value");
  if (b.field == Banner::Complex && !(ss >> im))
    throw IoError("matrix market: complex entry missing imaginary part");
  return Scalar{re, im};
}

void format_value(std::ostream& out, const Scalar& v, bool complex_field) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.16e", v.real());
  out << buf;
  if (complex_field) {
    std::snprintf(buf, sizeof(buf), " %.16e", v.imag());
    out << buf;
  }
}

bool all_real(const std::vector<Scalar>& values) {
  for (const auto& v : values)
    if (v.imag() != 0.0) return false;
  return true;
}

std::vector<SparseMatrixCsr::Triplet> read_coordinate_triplets(std::istream& in,
                                                               const Banner& b,
                                                               std::size_t& rows,
                                                               std::size_t& cols) {
  std::istringstream size_line(next_content_line(in));
  long long m = 0, n = 0, nnz = 0;
  if (!(size_line >> m >> n >> nnz) || m < 0 || n < 0 || nnz < 0)
    throw IoError("matrix market: malformed coordinate size line");
  rows = static_cast<std::size_t>(m);
  cols = static_cast<std::size_t>(n);

  std::vector<SparseMatrixCsr::Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz) * 2);
  for (long long e = 0; e < nnz; ++e) {
    std::istringstream entry(next_content_line(in));
    long long i = 0, j = 0;
    if (!(entry >> i >> j)) throw IoError("matrix market: malformed coordinate entry");
    if (i < 1 || j < 1 || i > m || j > n)
      throw IoError("matrix market: coordinate index out of range");
    const Scalar v = read_value(entry, b);
    const auto r = static_cast<std::size_t>(i - 1);
    const auto c = static_cast<std::size_t>(j - 1);
    triplets.push_back({r, c, v});
    if (r != c && b.symmetry == Banner::Symmetric) triplets.push_back({c, r, v});
    if (r != c && b.symmetry == Banner::Hermitian)
      triplets.push_back({c, r, std::conj(v)});
  }
  return triplets;
}

DenseMatrix read_array(std::istream& in, const Banner& b) {
  std::istringstream size_line(next_content_line(in));
  long long m = 0, n = 0;
  if (!(size_line >> m >> n) || m < 0 || n < 0)
    throw IoError("matrix market: malformed array size line");
  const auto rows = static_cast<std::size_t>(m);
  const auto cols = static_cast<std::size_t>(n);
  DenseMatrix out(rows, cols);

  if (b.symmetry == Banner::General) {
    // column-major full listing
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream entry(next_content_line(in));
        out(i, j) = read_value(entry, b);
      }
    return out;
  }
  if (rows != cols)
    throw IoError("matrix market: symmetric array file must be square");
  // lower triangle, column-major
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = j; i < rows; ++i) {
      std::istringstream entry(next_content_line(in));
      const Scalar v = read_value(entry, b);
      out(i, j) = v;
      out(j, i) = b.symmetry == Banner::Hermitian ? std::conj(v) : v;
    }
  return out;
}

}  // namespace

DenseMatrix read_dense(std::istream& in) {
  std::string banner_line;
  if (!std::getline(in, banner_line)) throw IoError("matrix market: empty input");
  const Banner b = parse_banner(banner_line);
  if (!b.coordinate) return read_array(in, b);
  std::size_t rows = 0, cols = 0;
  auto triplets = read_coordinate_triplets(in, b, rows, cols);
  return SparseMatrixCsr::build(rows, cols, std::move(triplets)).densify();
}

SparseMatrixCsr read_sparse(std::istream& in) {
  std::string banner_line;
  if (!std::getline(in, banner_line)) throw IoError("matrix market: empty input");
  const Banner b = parse_banner(banner_line);
  if (!b.coordinate)
    throw IoError("matrix market: expected a coordinate file for sparse input");
  std::size_t rows = 0, cols = 0;
  auto triplets = read_coordinate_triplets(in, b, rows, cols);
  return SparseMatrixCsr::build(rows, cols, std::move(triplets));
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
  const bool complex_field = !all_real(m.data());
  out << "%%MatrixMarket matrix array " << (complex_field ? "complex" : "real")
      << " general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) {
      format_value(out, m(i, j), complex_field);
      out << "\n";
    }
}

void write_sparse(std::ostream& out, const SparseMatrixCsr& m) {
  const bool complex_field = !all_real(m.values());
  out << "%%MatrixMarket matrix coordinate "
      << (complex_field ? "complex" : "real") << " general\n";
  out << m.rows() << " " << m.cols() << " " << m.nnz() << "\n";
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      out << (r + 1) << " " << (m.col_idx()[k] + 1) << " ";
      format_value(out, m.values()[k], complex_field);
      out << "\n";
    }
}

DenseMatrix read_dense_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_dense(in);
}

SparseMatrixCsr read_sparse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_sparse(in);
}

bool file_is_coordinate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string banner_line;
  if (!std::getline(in, banner_line)) throw IoError("matrix market: empty input");
  return parse_banner(banner_line).coordinate;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void write_dense_file(const std::string& path, const DenseMatrix& m) {
  std::ostringstream ss;
  write_dense(ss, m);
  write_file_atomic(path, ss.str());
}

void write_sparse_file(const std::string& path, const SparseMatrixCsr& m) {
  std::ostringstream ss;
  write_sparse(ss, m);
  write_file_atomic(path, ss.str());
}

}  // namespace nn::mm
