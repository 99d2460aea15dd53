#pragma once

#include <optional>
#include <variant>

#include "nn/bigint.hpp"
#include "nn/dense_matrix.hpp"
#include "nn/solver.hpp"
#include "nn/sparse_csr.hpp"

namespace nn {

enum class FactorizedMode { DenseStored, SparseMatrixFree };

/// Product-form plan for a Neumann series of order gamma = 2^s - 1.
struct FactorizedPlan {
  BigInt gamma;
  std::size_t num_factors = 0;  // log2(gamma + 1)
  FactorizedMode mode = FactorizedMode::DenseStored;

  /// Validates gamma + 1 is a power of two, else PlanError.
  static FactorizedPlan for_order(const BigInt& gamma, FactorizedMode mode);
};

/// Ax = B.  When hermitian_normal is set, `a` already holds W = A*A and `b`
/// holds A*B.
struct LinearSystem {
  std::variant<DenseMatrix, SparseMatrixCsr> a;
  DenseMatrix b;
  bool hermitian_normal = false;
};

/// Chebyshev-then-Neumann hybrid: ci_steps Chebyshev applications build the
/// preconditioner (0 means none, a plain truncated series), then an outer
/// series of ns_terms correction terms.
struct CnsConfig {
  std::size_t ci_steps = 1;
  std::size_t ns_terms = 1;
  bool factorize_outer = false;
};

struct NonConvergenceError : Error {
  NonConvergenceError(const std::string& what, ConvergenceReport rep)
      : Error(what), report(std::move(rep)) {}
  ConvergenceReport report;
};

/// sum_{n=0}^{gamma} P^n phi evaluated as the product
/// prod_{n=0}^{s-1} (I + P^{2^n}) phi, alternating accumulator products and
/// squarings of P.  Product tally: 2s + 1 with a general phi, 2s - 1 when
/// phi is the identity (P formation and the trailing product are skipped).
DenseMatrix ns_factorized(const DenseMatrix& phi, const DenseMatrix& w_tilde,
                          const FactorizedPlan& plan, OpCounter* counter = nullptr);

struct NormalSolveResult {
  DenseMatrix x;
  ConvergenceReport report;
  double backward_error = 0.0;  // ||A*A x - A*B||_F / ||A*B||_F, diagnostic
};

/// Solves Ax = B through the normal equations: W = A*A is Hermitian PSD by
/// construction, theta = 1/Tr(W), x = inv(W) A* B with inv(W) from
/// nn_invert.  Raises NonConvergenceError (carrying the report) when the
/// nest budget ran out and the backward error is still above tol.
NormalSolveResult solve_normal_equations(const LinearSystem& sys,
                                         const SolverConfig& config,
                                         OpCounter* counter = nullptr);

/// Matrix-free factorized solve on a sparse system W x = B: the update
/// Z += P^{2^n} Z applies P = I - theta W to the block 2^n times (one
/// sparse product plus one fused scaled subtraction each); P is never
/// formed or squared.  Total sparse applications: gamma.  The result is
/// scaled by theta.
DenseMatrix solve_sparse_factorized(const LinearSystem& sys, const BigInt& gamma,
                                    const Normalization& norm,
                                    OpCounter* counter = nullptr);

/// Chebyshev-Neumann hybrid inverse estimate for w_tilde; uses the
/// factorized outer series when requested and ns_terms + 1 is a power of
/// two.  The effective series order is 3^ci_steps * (ns_terms + 1) - 1.
DenseMatrix cns_invert(const DenseMatrix& w_tilde, const CnsConfig& cns,
                       OpCounter* counter = nullptr);

}  // namespace nn
