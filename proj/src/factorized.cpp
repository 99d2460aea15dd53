#include "nn/factorized.hpp"

#include <cmath>
#include <string>

#include "nn/errors.hpp"
#include "nn/kernels.hpp"
#include "nn/normalization.hpp"

namespace nn {
namespace {

std::size_t power_of_two_exponent(const BigInt& gamma, const char* who) {
  if (gamma < 1) throw PlanError(std::string(who) + ": order must be >= 1");
  const BigInt g1 = gamma + 1;
  if ((g1 & gamma) != 0)
    throw PlanError(std::string(who) + ": order + 1 must be a power of two");
  return boost::multiprecision::msb(g1);
}

/// Z - theta * Y in one fused pass (the "scaled block subtraction").
DenseMatrix fused_axpy_sub(const DenseMatrix& z, double theta, const DenseMatrix& y,
                           OpCounter* counter) {
  DenseMatrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i)
    out.data()[i] = z.data()[i] - theta * y.data()[i];
  if (counter) counter->add_n2();
  if (!out.all_finite()) throw DomainError("fused_axpy_sub: non-finite entry");
  return out;
}

}  // namespace

FactorizedPlan FactorizedPlan::for_order(const BigInt& gamma, FactorizedMode mode) {
  FactorizedPlan plan;
  plan.gamma = gamma;
  plan.num_factors = power_of_two_exponent(gamma, "FactorizedPlan");
  plan.mode = mode;
  return plan;
}

DenseMatrix ns_factorized(const DenseMatrix& phi, const DenseMatrix& w_tilde,
                          const FactorizedPlan& plan, OpCounter* counter) {
  if (plan.mode != FactorizedMode::DenseStored)
    throw PlanError("ns_factorized: plan must be in dense mode");
  if (!w_tilde.square() || phi.rows() != w_tilde.rows() ||
      phi.cols() != w_tilde.rows())
    throw ShapeError("ns_factorized: shapes do not conform");

  const std::size_t s = plan.num_factors;
  const bool identity_start = phi.is_identity();
  DenseMatrix p = identity_minus(
      identity_start ? w_tilde : matmul(phi, w_tilde, counter), counter);

  DenseMatrix acc = DenseMatrix::identity(w_tilde.rows());
  for (std::size_t n = 0; n < s; ++n) {
    acc = matmul(acc, plus_identity(p, counter), counter);
    if (n + 1 < s) p = matmul(p, p, counter);
  }
  return identity_start ? acc : matmul(acc, phi, counter);
}

NormalSolveResult solve_normal_equations(const LinearSystem& sys,
                                         const SolverConfig& config,
                                         OpCounter* counter) {
  const DenseMatrix a = std::holds_alternative<DenseMatrix>(sys.a)
                            ? std::get<DenseMatrix>(sys.a)
                            : std::get<SparseMatrixCsr>(sys.a).densify();
  if (!a.square()) throw ShapeError("solve_normal_equations: A must be square");
  if (sys.b.rows() != a.rows())
    throw ShapeError("solve_normal_equations: B row count does not match A");

  DenseMatrix w, rhs;
  if (sys.hermitian_normal) {
    w = a;          // caller already formed W = A*A
    rhs = sys.b;    // and A*B
  } else {
    const DenseMatrix ah = conjugate_transpose(a, counter);
    w = matmul(ah, a, counter);
    rhs = matmul(ah, sys.b, counter);
  }

  const Normalization norm = theta_trace(w);
  auto [w_inv, report] = nn_invert(w, norm, config, counter);
  DenseMatrix x = matmul(w_inv, rhs, counter);

  // backward check on the normal equations, diagnostic
  const DenseMatrix residual = sub(matmul(w, x), rhs);
  const double rhs_norm = frobenius_norm(rhs);
  const double backward =
      rhs_norm > 0.0 ? frobenius_norm(residual) / rhs_norm : frobenius_norm(residual);

  if (report.stopped_reason == StopReason::MaxNests && backward > config.tol)
    throw NonConvergenceError(
        "solve_normal_equations: nest budget exhausted with backward error " +
            std::to_string(backward),
        report);
  return {std::move(x), std::move(report), backward};
}

DenseMatrix solve_sparse_factorized(const LinearSystem& sys, const BigInt& gamma,
                                    const Normalization& norm,
                                    OpCounter* counter) {
  if (!std::holds_alternative<SparseMatrixCsr>(sys.a))
    throw ShapeError("solve_sparse_factorized: system matrix must be CSR");
  const SparseMatrixCsr& w = std::get<SparseMatrixCsr>(sys.a);
  if (!w.square()) throw ShapeError("solve_sparse_factorized: W must be square");
  if (sys.b.rows() != w.rows())
    throw ShapeError("solve_sparse_factorized: B row count does not match W");
  if (!norm.valid)
    throw ContractionError("solve_sparse_factorized: invalid normalization");

  const std::size_t s = power_of_two_exponent(gamma, "solve_sparse_factorized");
  if (gamma > BigInt(1) << 30)
    throw BudgetError("solve_sparse_factorized: order too large to apply");
  const double theta = norm.theta;

  // One application of P = I - theta W to the block: sparse product plus a
  // fused scaled subtraction.  P is never formed, never squared.
  const auto apply_p = [&](const DenseMatrix& z) {
    const DenseMatrix y = spmv_block(w, z, counter);
    return fused_axpy_sub(z, theta, y, counter);
  };

  DenseMatrix z = sys.b;
  std::uint64_t reps = 1;
  for (std::size_t n = 0; n < s; ++n) {
    DenseMatrix t = z;
    try {
      for (std::uint64_t r = 0; r < reps; ++r) t = apply_p(t);
    } catch (const DomainError&) {
      throw DivergenceError(
          "solve_sparse_factorized: non-finite block at factor " + std::to_string(n),
          n);
    }
    z = add(z, t, counter);
    reps <<= 1;
  }
  return scale(z, Scalar{theta, 0.0}, counter);
}

DenseMatrix cns_invert(const DenseMatrix& w_tilde, const CnsConfig& cns,
                       OpCounter* counter) {
  if (!w_tilde.square()) throw ShapeError("cns_invert: matrix must be square");
  if (cns.ns_terms < 1) throw DomainError("cns_invert: ns_terms must be >= 1");

  DenseMatrix phi_ci = DenseMatrix::identity(w_tilde.rows());
  for (std::size_t step = 0; step < cns.ci_steps; ++step)
    phi_ci = chebyshev_step(phi_ci, w_tilde, counter);

  const BigInt outer_plus_one = BigInt(cns.ns_terms) + 1;
  if (cns.factorize_outer && (outer_plus_one & BigInt(cns.ns_terms)) == 0) {
    const auto plan =
        FactorizedPlan::for_order(BigInt(cns.ns_terms), FactorizedMode::DenseStored);
    return ns_factorized(phi_ci, w_tilde, plan, counter);
  }
  return ns_sum(phi_ci, w_tilde, cns.ns_terms, counter);
}

}  // namespace nn
