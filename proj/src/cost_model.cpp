#include "nn/cost_model.hpp"

#include <cmath>

#include "nn/errors.hpp"

namespace nn {
namespace {

std::size_t power_of_two_exponent(const BigInt& gamma) {
  if (gamma < 1) throw PlanError("cost model: order must be >= 1");
  const BigInt g1 = gamma + 1;
  if ((g1 & gamma) != 0)
    throw PlanError("cost model: order + 1 must be a power of two");
  return boost::multiprecision::msb(g1);
}

Rational cube(std::size_t n) {
  const BigInt b(n);
  return Rational(b * b * b);
}

Rational square(std::size_t n) {
  const BigInt b(n);
  return Rational(b * b);
}

CostEstimate assemble(Rational n3_coeff, Rational n2_coeff, CostFormula formula,
                      CostParams params, std::string note = {}) {
  CostEstimate e;
  e.n3_coefficient = n3_coeff;
  e.n2_coefficient = n2_coeff;
  e.n3_term = n3_coeff * cube(params.n);
  e.n2_term = n2_coeff * square(params.n);
  e.formula = formula;
  e.params = std::move(params);
  e.note = std::move(note);
  return e;
}

}  // namespace

CostEstimate cost_nn(std::size_t nests_i, std::size_t depth_L, std::size_t n,
                     NnCostVariant variant) {
  const BigInt i(nests_i), l1(depth_L + 1);
  const Rational n3 = Rational(i * l1);
  const Rational n2 = variant == NnCostVariant::MainText ? Rational((i + 1) * l1)
                                                         : Rational(i * l1);
  CostParams params;
  params.nests_i = nests_i;
  params.depth_L = depth_L;
  params.n = n;
  return assemble(n3, n2, CostFormula::NnRecursive, std::move(params));
}

CostEstimate cost_nn_explicit_sparse(std::size_t nests_i, std::size_t depth_L,
                                     std::size_t n) {
  const BigInt i(nests_i);
  // log_{L+1}(gamma+1) = i+1 substituted exactly
  const Rational first = Rational(BigInt(depth_L), 2) * Rational(i * (i + 1) * (i + 2) + 1);
  const Rational second = Rational(2 * i * (i + 1) + 1);
  CostParams params;
  params.nests_i = nests_i;
  params.depth_L = depth_L;
  params.n = n;
  params.gamma = boost::multiprecision::pow(BigInt(depth_L + 1),
                                            static_cast<unsigned>(nests_i + 1)) -
                 1;
  return assemble(first + second, Rational(0), CostFormula::NnExplicitSparse,
                  std::move(params),
                  "both displayed terms carry N^3 in the source formula; the "
                  "second matches the N^2 slot of the sibling formulas");
}

CostEstimate cost_factorized(const BigInt& gamma, std::size_t n) {
  const std::size_t s = power_of_two_exponent(gamma);
  CostParams params;
  params.n = n;
  params.gamma = gamma;
  return assemble(Rational(2 * BigInt(s)), Rational(BigInt(s) + 1),
                  CostFormula::FactorizedDense, std::move(params));
}

CostEstimate cost_factorized_sparse_stored(const BigInt& gamma, std::size_t n) {
  const std::size_t s = power_of_two_exponent(gamma);
  const BigInt sb(s);
  CostParams params;
  params.n = n;
  params.gamma = gamma;
  return assemble(Rational(sb * sb + sb - 1, 2), Rational(sb * sb),
                  CostFormula::FactorizedSparseStored, std::move(params),
                  "half-integer N^3 coefficient reproduced literally");
}

BigInt budget_order(std::size_t budget_K, std::size_t depth_L) {
  if (depth_L < 1) throw DomainError("budget_order: depth must be >= 1");
  const std::size_t i = budget_K / (depth_L + 1);  // floored when not divisible
  return boost::multiprecision::pow(BigInt(depth_L + 1), static_cast<unsigned>(i + 1)) -
         1;
}

BudgetAnalysis optimal_depth(std::size_t budget_K, std::size_t L_max) {
  if (budget_K < 2) throw DomainError("optimal_depth: budget must be >= 2");
  if (L_max < 1) throw DomainError("optimal_depth: L_max must be >= 1");

  BudgetAnalysis out;
  out.budget_K = budget_K;
  long double best = -1.0L;
  for (std::size_t L = 1; L <= L_max; ++L) {
    const std::size_t i = budget_K / (L + 1);
    const long double log_order =
        (static_cast<long double>(i) + 1.0L) * std::log(static_cast<long double>(L) + 1.0L);
    out.per_depth.emplace_back(L, budget_order(budget_K, L));
    // strict improvement only: ties keep the smaller depth (less storage)
    if (log_order > best * (1.0L + 1e-15L) + 1e-15L) {
      best = log_order;
      out.argmax_L = L;
    }
  }
  return out;
}

std::string cost_formula_name(CostFormula f) {
  switch (f) {
    case CostFormula::NnRecursive: return "nn_recursive";
    case CostFormula::NnExplicitSparse: return "nn_explicit_sparse";
    case CostFormula::FactorizedDense: return "factorized_dense";
    case CostFormula::FactorizedSparseStored: return "factorized_sparse_stored";
  }
  return "unknown";
}

}  // namespace nn
