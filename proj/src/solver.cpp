#include "nn/solver.hpp"

#include <cmath>

#include "nn/errors.hpp"
#include "nn/kernels.hpp"

#include <nlohmann/json.hpp>

namespace nn {
namespace {

constexpr double kWindowLow = 1e-12;   // roundoff floor for order fitting
constexpr double kWindowHigh = 0.5;    // pre-asymptotic cutoff

DenseMatrix shifted_identity_minus(double shift, const DenseMatrix& m,
                                   OpCounter* counter) {
  if (!m.square()) throw ShapeError("shifted_identity_minus: matrix must be square");
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = (i == j ? Scalar{shift, 0.0} : Scalar{0.0, 0.0}) - m(i, j);
  if (counter) counter->add_n2();
  return out;
}

/// sum_{n=0}^{L} P^n as I + P(I + P(...)); the innermost I + P is an
/// addition, so the chain costs L-1 products.
DenseMatrix horner_power_sum(const DenseMatrix& p, std::size_t depth_L,
                             OpCounter* counter) {
  if (depth_L == 0) return DenseMatrix::identity(p.rows());
  DenseMatrix s = plus_identity(p, counter);
  for (std::size_t j = 2; j <= depth_L; ++j)
    s = plus_identity(matmul(p, s, counter), counter);
  return s;
}

void validate_config(const SolverConfig& config) {
  if (config.tol < 1e-15)
    throw DomainError("SolverConfig: tol below double precision (minimum 1e-15)");
  if (config.max_nests < 1)
    throw DomainError("SolverConfig: max_nests must be >= 1");
}

}  // namespace

std::string stop_reason_name(StopReason r) {
  return r == StopReason::Tolerance ? "tolerance" : "max_nests";
}

std::string report_to_json(const ConvergenceReport& report) {
  nlohmann::json j;
  j["config"] = {{"depth_L", report.config.depth_L},
                 {"max_nests", report.config.max_nests},
                 {"tol", report.config.tol},
                 {"record_history", report.config.record_history}};
  auto hist = nlohmann::json::array();
  for (const auto& [nest, eps] : report.history)
    hist.push_back(nlohmann::json::array({nest, eps}));
  j["history"] = std::move(hist);
  j["counts"] = {{"n3_multiplies", report.n3_multiplies},
                 {"n2_ops", report.n2_ops},
                 {"spmv_count", report.spmv_count}};
  j["stopped_reason"] = stop_reason_name(report.stopped_reason);
  j["alpha_estimate"] =
      report.alpha_estimate ? nlohmann::json(*report.alpha_estimate) : nlohmann::json();
  j["kappa_used"] =
      report.kappa_used ? nlohmann::json(*report.kappa_used) : nlohmann::json();
  return j.dump(2);
}

double residual_epsilon(const DenseMatrix& phi, const DenseMatrix& w_tilde) {
  const DenseMatrix p = identity_minus(matmul(phi, w_tilde));
  return frobenius_norm(p) / std::sqrt(static_cast<double>(p.rows()));
}

DenseMatrix ns_sum(const DenseMatrix& phi0, const DenseMatrix& w_tilde,
                   std::size_t order, OpCounter* counter) {
  if (!w_tilde.square() || phi0.rows() != w_tilde.rows() ||
      phi0.cols() != w_tilde.rows())
    throw ShapeError("ns_sum: shapes do not conform");
  if (order == 0) return phi0;

  const bool identity_start = phi0.is_identity();
  const DenseMatrix p = identity_minus(
      identity_start ? w_tilde : matmul(phi0, w_tilde, counter), counter);
  DenseMatrix t = plus_identity(p, counter);
  for (std::size_t step = 2; step <= order; ++step)
    t = plus_identity(matmul(t, p, counter), counter);
  return identity_start ? t : matmul(t, phi0, counter);
}

DenseMatrix nn_step(const DenseMatrix& phi, const DenseMatrix& w_tilde,
                    std::size_t depth_L, OpCounter* counter) {
  if (!w_tilde.square() || phi.rows() != w_tilde.rows() ||
      phi.cols() != w_tilde.rows())
    throw ShapeError("nn_step: shapes do not conform");
  if (depth_L == 0) return phi;  // documented identity

  const DenseMatrix p = identity_minus(matmul(phi, w_tilde, counter), counter);
  const DenseMatrix s = horner_power_sum(p, depth_L, counter);
  return matmul(s, phi, counter);
}

DenseMatrix newton_step(const DenseMatrix& z, const DenseMatrix& w_tilde,
                        OpCounter* counter) {
  if (!w_tilde.square() || z.rows() != w_tilde.rows() || z.cols() != w_tilde.rows())
    throw ShapeError("newton_step: shapes do not conform");
  const DenseMatrix y = matmul(w_tilde, z, counter);
  return matmul(z, shifted_identity_minus(2.0, y, counter), counter);
}

DenseMatrix chebyshev_step(const DenseMatrix& z, const DenseMatrix& w_tilde,
                           OpCounter* counter) {
  if (!w_tilde.square() || z.rows() != w_tilde.rows() || z.cols() != w_tilde.rows())
    throw ShapeError("chebyshev_step: shapes do not conform");
  const DenseMatrix y = matmul(w_tilde, z, counter);
  const DenseMatrix inner =
      matmul(y, shifted_identity_minus(3.0, y, counter), counter);
  return matmul(z, shifted_identity_minus(3.0, inner, counter), counter);
}

std::pair<DenseMatrix, ConvergenceReport> nn_invert(const DenseMatrix& w,
                                                    const Normalization& norm,
                                                    const SolverConfig& config,
                                                    OpCounter* counter) {
  if (!w.square()) throw ShapeError("nn_invert: matrix must be square");
  validate_config(config);
  const DenseMatrix w_tilde = normalize(w, norm);  // valid-flag enforced here

  const double n3_before = counter ? counter->n3_multiplies() : 0.0;
  const std::int64_t n2_before = counter ? counter->n2_ops() : 0;
  const std::int64_t spmv_before = counter ? counter->spmv_count() : 0;

  ConvergenceReport report;
  report.config = config;

  DenseMatrix phi = DenseMatrix::identity(w.rows());
  std::size_t nest = 0;
  while (true) {
    const double eps = residual_epsilon(phi, w_tilde);
    if (config.record_history) report.history.emplace_back(nest, eps);
    if (eps < config.tol) {
      report.stopped_reason = StopReason::Tolerance;
      break;
    }
    if (nest >= config.max_nests) {
      report.stopped_reason = StopReason::MaxNests;
      break;
    }
    try {
      phi = nn_step(phi, w_tilde, config.depth_L, counter);
    } catch (const DomainError&) {
      throw DivergenceError(
          "nn_invert: non-finite iterate at nest " + std::to_string(nest + 1),
          nest + 1);
    }
    ++nest;
  }

  if (counter) {
    report.n3_multiplies = counter->n3_multiplies() - n3_before;
    report.n2_ops = counter->n2_ops() - n2_before;
    report.spmv_count = counter->spmv_count() - spmv_before;
  }
  if (config.record_history) {
    try {
      report.alpha_estimate = convergence_order_estimate(report);
    } catch (const EstimationError&) {
      report.alpha_estimate.reset();
    }
  }
  return {scale(phi, Scalar{norm.theta, 0.0}, counter), report};
}

DenseMatrix nn_explicit(const DenseMatrix& phi0, const DenseMatrix& w_tilde,
                        std::size_t nests_i, std::size_t depth_L,
                        OpCounter* counter) {
  if (!w_tilde.square() || phi0.rows() != w_tilde.rows() ||
      phi0.cols() != w_tilde.rows())
    throw ShapeError("nn_explicit: shapes do not conform");
  const BigInt top_power = boost::multiprecision::pow(
      BigInt(depth_L + 1), static_cast<unsigned>(nests_i));
  if (top_power > BigInt(1) << 62)
    throw BudgetError("nn_explicit: inner power (L+1)^i is not representable");

  const bool identity_start = phi0.is_identity();
  DenseMatrix q = identity_minus(
      identity_start ? w_tilde : matmul(phi0, w_tilde, counter), counter);

  DenseMatrix acc;
  for (std::size_t j = 0; j <= nests_i; ++j) {
    const DenseMatrix factor = horner_power_sum(q, depth_L, counter);
    acc = j == 0 ? factor : matmul(factor, acc, counter);
    if (j < nests_i)
      q = power_ladder(q, static_cast<std::uint64_t>(depth_L) + 1, counter);
  }
  return identity_start ? acc : matmul(acc, phi0, counter);
}

BigInt equivalent_ns_order(std::size_t nests_i, std::size_t depth_L) {
  return boost::multiprecision::pow(BigInt(depth_L + 1),
                                    static_cast<unsigned>(nests_i + 1)) -
         1;
}

std::size_t estimate_nests(double kappa, std::size_t depth_L) {
  if (kappa < 1.0) throw DomainError("estimate_nests: kappa must be >= 1");
  if (depth_L < 1) throw DomainError("estimate_nests: depth must be >= 1");
  const double ln2 = std::log(2.0);
  // log_{L+1}(2 kappa^{2 ln 2}) - 1, with 2/log2(e) read as 2 ln 2
  const double value =
      (ln2 + 2.0 * ln2 * std::log(kappa)) / std::log(static_cast<double>(depth_L) + 1.0) -
      1.0;
  const double ceiled = std::ceil(value);
  return ceiled < 1.0 ? 1 : static_cast<std::size_t>(ceiled);
}

double convergence_order_estimate(const ConvergenceReport& report) {
  std::size_t usable = 0;
  for (const auto& [nest, eps] : report.history)
    if (eps > kWindowLow && eps < kWindowHigh) ++usable;
  if (usable < 4)
    throw EstimationError(
        "convergence_order_estimate: need at least 4 history entries inside the "
        "(1e-12, 0.5) window, have " +
        std::to_string(usable));

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k + 1 < report.history.size(); ++k) {
    const double a = report.history[k].second;
    const double b = report.history[k + 1].second;
    if (a > kWindowLow && a < kWindowHigh && b > kWindowLow && b < kWindowHigh &&
        report.history[k + 1].first == report.history[k].first + 1) {
      xs.push_back(std::log(a));
      ys.push_back(std::log(b));
    }
  }
  if (xs.size() < 2)
    throw EstimationError("convergence_order_estimate: too few usable pairs");

  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  if (sxx == 0.0)
    throw EstimationError("convergence_order_estimate: degenerate abscissae");
  return sxy / sxx;
}

}  // namespace nn
