#include "nn/normalization.hpp"

#include <cmath>
#include <optional>
#include <vector>

#include "nn/errors.hpp"
#include "nn/rng.hpp"

namespace nn {
namespace {

Normalization measured(double theta, ThetaKind kind, std::size_t k_order,
                       double contraction) {
  Normalization n;
  n.theta = theta;
  n.kind = kind;
  n.k_order = k_order;
  n.contraction_norm = contraction;
  n.valid = contraction < 1.0;
  return n;
}

double positive_real_trace(Scalar t, const char* who) {
  const double mag = std::abs(t);
  if (mag > 0.0 && std::abs(t.imag()) > 1e-12 * mag)
    throw NotPsdError(std::string(who) + ": trace has a non-real part");
  if (t.real() <= 0.0)
    throw NotPsdError(std::string(who) + ": trace is not strictly positive");
  return t.real();
}

}  // namespace

Normalization theta_trace(const DenseMatrix& w) {
  const double tr = positive_real_trace(trace(w), "theta_trace");
  const double theta = 1.0 / tr;
  const DenseMatrix shifted = identity_minus(scale(w, Scalar{theta, 0.0}));
  return measured(theta, ThetaKind::TraceTheta1, 0,
                  spectral_norm_estimate(shifted).value);
}

Normalization theta_trace(const SparseMatrixCsr& w) {
  if (!w.square()) throw ShapeError("theta_trace: matrix must be square");
  const double tr = positive_real_trace(w.trace(), "theta_trace");
  const double theta = 1.0 / tr;
  return measured(theta, ThetaKind::TraceTheta1, 0,
                  spectral_norm_estimate_shifted(w, Scalar{theta, 0.0}).value);
}

Normalization theta_power(const DenseMatrix& w, std::size_t k, std::uint64_t seed) {
  if (!w.square()) throw ShapeError("theta_power: matrix must be square");
  if (k < 1) throw DomainError("theta_power: k must be >= 1");
  const std::size_t n = w.rows();

  // k+1 normalized applications; the last growth factor r gives
  // ||W^{k+1} v|| / ||W^k v|| exactly, so theta = k / ((k+1) r^2) without
  // over/underflow at large k.
  const auto attempt = [&](std::uint64_t s) -> std::optional<double> {
    GaussianStream g(s);
    std::vector<Scalar> v(n);
    for (auto& x : v) x = Scalar{g.next(), g.next()};
    double nrm = 0.0;
    for (const auto& x : v) nrm += std::norm(x);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return std::nullopt;
    for (auto& x : v) x /= nrm;

    double growth = 0.0;
    for (std::size_t j = 1; j <= k + 1; ++j) {
      v = matvec(w, v);
      double r = 0.0;
      for (const auto& x : v) r += std::norm(x);
      r = std::sqrt(r);
      if (r == 0.0) return std::nullopt;
      for (auto& x : v) x /= r;
      growth = r;
    }
    return growth;
  };

  std::optional<double> growth = attempt(seed);
  if (!growth) growth = attempt(seed + 1);
  if (!growth)
    throw DegenerateProbeError("theta_power: probe vector annihilated twice");

  const double kd = static_cast<double>(k);
  const double theta = kd / ((kd + 1.0) * (*growth) * (*growth));
  const DenseMatrix shifted = identity_minus(scale(w, Scalar{theta, 0.0}));
  return measured(theta, ThetaKind::PowerTheta2, k,
                  spectral_norm_estimate(shifted).value);
}

DenseMatrix normalize(const DenseMatrix& w, const Normalization& norm) {
  if (!norm.valid)
    throw ContractionError(
        "normalize: normalization does not satisfy the contraction condition");
  return scale(w, Scalar{norm.theta, 0.0});
}

double contraction_check(const DenseMatrix& phi, const DenseMatrix& w_tilde) {
  const DenseMatrix product = matmul(phi, w_tilde);
  return spectral_norm_estimate(identity_minus(product)).value;
}

}  // namespace nn
