#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nn {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not conform.
struct ShapeError : Error {
  using Error::Error;
};

/// Parameter outside its admissible range (cond < 1, kappa < 1, tol too small, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Gauss-Jordan elimination hit a pivot below the singularity threshold.
struct SingularMatrixError : Error {
  SingularMatrixError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_index(pivot) {}
  std::size_t pivot_index;
};

/// Trace-based normalization rejected the input (trace not strictly positive real).
struct NotPsdError : Error {
  using Error::Error;
};

/// Power-method probe vector was annihilated twice in a row.
struct DegenerateProbeError : Error {
  using Error::Error;
};

/// A normalization marked invalid was used where contraction is required.
struct ContractionError : Error {
  using Error::Error;
};

/// Iteration produced a non-finite intermediate.
struct DivergenceError : Error {
  DivergenceError(const std::string& what, std::size_t nest)
      : Error(what), nest_index(nest) {}
  std::size_t nest_index;
};

/// Factorization order gamma+1 is not a power of two.
struct PlanError : Error {
  using Error::Error;
};

/// Requested exponent or order exceeds the representable budget.
struct BudgetError : Error {
  using Error::Error;
};

/// Too little usable history to fit a convergence order.
struct EstimationError : Error {
  using Error::Error;
};

/// Matrix Market parse or write failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace nn
