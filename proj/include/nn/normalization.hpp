#pragma once

#include <cstdint>

#include "nn/dense_matrix.hpp"
#include "nn/kernels.hpp"
#include "nn/sparse_csr.hpp"

namespace nn {

enum class ThetaKind { TraceTheta1, PowerTheta2 };

/// Scalar normalization theta with its measured contraction quality.
/// valid is true exactly when the measured ||I - theta*W||_2 estimate is
/// below one; invalid normalizations must not reach normalize().
struct Normalization {
  double theta = 0.0;
  ThetaKind kind = ThetaKind::TraceTheta1;
  std::size_t k_order = 0;  // only meaningful for PowerTheta2
  double contraction_norm = 0.0;
  bool valid = false;
};

/// theta = 1 / Re(trace(W)).  Requires a strictly positive real trace
/// (the PSD assumption); rejects traces with a relative imaginary part
/// above 1e-12.  The contraction norm is measured, not assumed.
Normalization theta_trace(const DenseMatrix& w);

/// Sparse variant for the matrix-free solve path; W assumed Hermitian.
Normalization theta_trace(const SparseMatrixCsr& w);

/// theta = k ||W^k v||^2 / ((k+1) ||W^{k+1} v||^2) with a seeded unit
/// Gaussian probe v, evaluated as k+1 successive normalized mat-vec
/// applications.  Contraction is measured; a result with contraction
/// >= 1 comes back marked invalid and callers fall back to theta_trace.
/// An annihilated probe is retried once with the next seed, then raises
/// DegenerateProbeError.
Normalization theta_power(const DenseMatrix& w, std::size_t k, std::uint64_t seed);

/// W~ = theta * W.  Raises ContractionError for an invalid normalization.
DenseMatrix normalize(const DenseMatrix& w, const Normalization& norm);

/// Measured ||I - phi * w_tilde||_2; diagnostic, not tallied.
double contraction_check(const DenseMatrix& phi, const DenseMatrix& w_tilde);

}  // namespace nn
