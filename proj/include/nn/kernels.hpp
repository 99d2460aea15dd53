#pragma once

#include <cstdint>
#include <vector>

#include "nn/dense_matrix.hpp"
#include "nn/op_counter.hpp"
#include "nn/sparse_csr.hpp"

namespace nn {

/// Number of row-partition workers the kernels may use.  Reads NN_WORKERS
/// (>= 1) and falls back to the hardware count.  The per-element reduction
/// order is fixed, so results are bit-identical for any worker count.
unsigned worker_count();

/// Exact triple-loop product with ascending-index inner summation.
/// Counts 1 toward n3_multiplies for an equal-size square product, else the
/// fractional rows*inner*cols / N^3 equivalent with N the largest dimension.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b,
                   OpCounter* counter = nullptr);

/// Dense matrix times vector, fixed summation order.  Not tallied.
std::vector<Scalar> matvec(const DenseMatrix& m, const std::vector<Scalar>& x);

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b,
                OpCounter* counter = nullptr);
DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b,
                OpCounter* counter = nullptr);
DenseMatrix scale(const DenseMatrix& m, Scalar factor,
                  OpCounter* counter = nullptr);
/// a - b where a is implied identity-shaped: returns identity(n) - m.
DenseMatrix identity_minus(const DenseMatrix& m, OpCounter* counter = nullptr);
/// m + identity(n).
DenseMatrix plus_identity(const DenseMatrix& m, OpCounter* counter = nullptr);

DenseMatrix conjugate_transpose(const DenseMatrix& m,
                                OpCounter* counter = nullptr);

Scalar trace(const DenseMatrix& m);

double frobenius_norm(const DenseMatrix& m);

struct SpectralEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Spectral norm (dominant singular value) by power iteration on m* m from a
/// seeded random start.  Converged when successive Rayleigh quotients agree
/// to tol relative; past max_iters the best estimate comes back flagged.
SpectralEstimate spectral_norm_estimate(const DenseMatrix& m, double tol = 1e-12,
                                        int max_iters = 2000,
                                        std::uint64_t seed = 0x5eed5eedULL);

/// Same estimator for the shifted sparse operator I - theta*W, applied
/// matrix-free.  W is assumed Hermitian (the PSD solve path guarantees it).
SpectralEstimate spectral_norm_estimate_shifted(const SparseMatrixCsr& w,
                                                Scalar theta, double tol = 1e-12,
                                                int max_iters = 2000,
                                                std::uint64_t seed = 0x5eed5eedULL);

/// Gauss-Jordan inverse with partial pivoting; the exact small-scale ground
/// truth the iterative methods are checked against.  Pivot magnitudes below
/// 1e-13 * ||m||_F raise SingularMatrixError with the pivot index.
DenseMatrix direct_inverse_oracle(const DenseMatrix& m);

/// Seeded symmetric positive-definite test matrix Q diag(lambda) Q^T with Q
/// from Householder QR of a Gaussian matrix and lambda log-uniform in
/// [1/cond, 1]; the extreme-eigenvalue ratio is cond by construction.
DenseMatrix random_spd(std::size_t n, double cond, std::uint64_t seed);

/// Seeded complex matrix U diag(sigma) V* with singular values log-uniform in
/// [1/cond, 1]; cond(A) = cond exactly, A*A has condition cond^2.
DenseMatrix random_conditioned_complex(std::size_t n, double cond,
                                       std::uint64_t seed);

/// Seeded Hermitian diagonally dominant sparse matrix at roughly the given
/// off-diagonal density; positive definite by construction.
SparseMatrixCsr random_sparse_spd(std::size_t n, double density,
                                  std::uint64_t seed);

/// p^exponent by binary square-and-multiply, storing only the running square
/// and the accumulator.  Multiply count: floor(log2 e) + popcount(e) - 1.
/// Exponent 0 returns the identity (documented convention, not an error).
DenseMatrix power_ladder(const DenseMatrix& p, std::uint64_t exponent,
                         OpCounter* counter = nullptr);

/// Sparse matrix times dense block; adds x.cols() to spmv_count.
DenseMatrix spmv_block(const SparseMatrixCsr& p, const DenseMatrix& x,
                       OpCounter* counter = nullptr);

}  // namespace nn
