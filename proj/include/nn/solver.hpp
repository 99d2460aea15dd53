#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nn/bigint.hpp"
#include "nn/dense_matrix.hpp"
#include "nn/normalization.hpp"
#include "nn/op_counter.hpp"

namespace nn {

/// Inversion loop parameters: inception depth L, nest budget, and the
/// stopping tolerance on the residual eps = ||I - phi W~||_F / sqrt(N).
struct SolverConfig {
  std::size_t depth_L = 2;
  std::size_t max_nests = 64;
  double tol = 1e-10;
  bool record_history = true;
};

/// Current iterate of the nesting loop.
struct NestState {
  DenseMatrix phi;
  std::size_t nest_index = 0;
  double epsilon = 0.0;
  std::optional<double> contraction;  // spectral estimate, filled by diagnostics
};

enum class StopReason { Tolerance, MaxNests };

struct ConvergenceReport {
  SolverConfig config;
  std::vector<std::pair<std::size_t, double>> history;  // (nest, eps)
  double n3_multiplies = 0.0;
  std::int64_t n2_ops = 0;
  std::int64_t spmv_count = 0;
  StopReason stopped_reason = StopReason::MaxNests;
  std::optional<double> alpha_estimate;
  std::optional<double> kappa_used;
};

std::string stop_reason_name(StopReason r);

/// Stable JSON document: config, history, counts, stopped_reason,
/// alpha_estimate.
std::string report_to_json(const ConvergenceReport& report);

/// Residual eps = ||I - phi w_tilde||_F / sqrt(N).  Diagnostic: the product
/// is not tallied, so convergence monitoring never distorts the multiply
/// counts the cost model predicts.
double residual_epsilon(const DenseMatrix& phi, const DenseMatrix& w_tilde);

/// Truncated Neumann series sum_{n=0}^{order} P^n phi0 with P = I - phi0 W~,
/// evaluated as the chain ((...(P+I)P + I)...) phi0: order-1 chain products,
/// plus the P product and the trailing phi0 product when phi0 is not the
/// identity.  Callers are responsible for the contraction precondition.
DenseMatrix ns_sum(const DenseMatrix& phi0, const DenseMatrix& w_tilde,
                   std::size_t order, OpCounter* counter = nullptr);

/// One nest: P = I - phi W~ (1 product), S = I + P(I + P(...)) with L-1
/// products, then S phi (1 product); exactly L+1 products, the per-nest
/// coefficient of the recursive cost formula.  depth_L = 0 returns phi
/// unchanged.
DenseMatrix nn_step(const DenseMatrix& phi, const DenseMatrix& w_tilde,
                    std::size_t depth_L, OpCounter* counter = nullptr);

/// Newton update Z(2I - W~ Z); 2 products.
DenseMatrix newton_step(const DenseMatrix& z, const DenseMatrix& w_tilde,
                        OpCounter* counter = nullptr);

/// Chebyshev update Z[3I - W~ Z(3I - W~ Z)] with W~ Z formed once; 3 products.
DenseMatrix chebyshev_step(const DenseMatrix& z, const DenseMatrix& w_tilde,
                           OpCounter* counter = nullptr);

/// Full inversion: phi(0) = I, nests until eps < tol or the budget runs out;
/// returns (phi * theta, report).  Residual monitoring is diagnostic and
/// untallied; the counter ends up with exactly nests * (L+1) products.
std::pair<DenseMatrix, ConvergenceReport> nn_invert(const DenseMatrix& w,
                                                    const Normalization& norm,
                                                    const SolverConfig& config,
                                                    OpCounter* counter = nullptr);

/// Non-recursive product form prod_{j=0}^{i} sum_{n=0}^{L} Q^{n (L+1)^j} phi0
/// with Q = I - phi0 W~; equals the recursive iterate phi^(i+1).  Inner
/// powers go through the square-and-multiply ladder.
DenseMatrix nn_explicit(const DenseMatrix& phi0, const DenseMatrix& w_tilde,
                        std::size_t nests_i, std::size_t depth_L,
                        OpCounter* counter = nullptr);

/// (L+1)^(i+1) - 1, exact at any size.
BigInt equivalent_ns_order(std::size_t nests_i, std::size_t depth_L);

/// Nest budget i(L) = ceil(log_{L+1}(2 kappa^{2 ln 2}) - 1), floored at 1.
std::size_t estimate_nests(double kappa, std::size_t depth_L);

/// Least-squares slope of log eps_{i+1} against log eps_i over the window
/// 1e-12 < eps < 0.5 (pre-roundoff, post-transient).  Needs at least four
/// usable history entries, else EstimationError.
double convergence_order_estimate(const ConvergenceReport& report);

}  // namespace nn
