#include "nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "nn/rng.hpp"

namespace nn {
namespace {

void check_finite(const DenseMatrix& m, const char* op) {
  if (!m.all_finite())
    throw DomainError(std::string(op) + ": produced a non-finite entry");
}

/// Partition [0, rows) into contiguous chunks, one worker each.  Every output
/// element is written by exactly one worker with the fixed inner-loop order,
/// so the result does not depend on the worker count.
template <class Fn>
void for_row_ranges(std::size_t rows, Fn&& fn) {
  unsigned workers = worker_count();
  if (workers <= 1 || rows < 64) {
    fn(std::size_t{0}, rows);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, rows));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (rows + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(rows, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

double vec_norm(const std::vector<Scalar>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

std::vector<Scalar> gaussian_probe(std::size_t n, std::uint64_t seed) {
  GaussianStream g(seed);
  std::vector<Scalar> v(n);
  for (auto& x : v) {
    const double re = g.next();
    const double im = g.next();
    x = Scalar{re, im};
  }
  const double nrm = vec_norm(v);
  if (nrm > 0.0)
    for (auto& x : v) x /= nrm;
  return v;
}

/// Householder QR; returns the unitary factor only.  Real input (zero
/// imaginary parts) yields an exactly real Q.
DenseMatrix householder_q(DenseMatrix a) {
  const std::size_t n = a.rows();
  std::vector<std::vector<Scalar>> reflectors;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::vector<Scalar> v(n, Scalar{0.0, 0.0});
    double xnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) xnorm2 += std::norm(a(i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) {
      reflectors.push_back(std::move(v));
      continue;
    }
    const Scalar x0 = a(k, k);
    const double x0abs = std::abs(x0);
    const Scalar phase = x0abs > 0.0 ? x0 / x0abs : Scalar{1.0, 0.0};
    const Scalar alpha = -phase * xnorm;
    for (std::size_t i = k; i < n; ++i) v[i] = a(i, k);
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0) {
      reflectors.push_back(std::move(v));
      continue;
    }
    const double beta = 2.0 / vnorm2;
    // A <- (I - beta v v*) A
    for (std::size_t j = k; j < n; ++j) {
      Scalar dot{0.0, 0.0};
      for (std::size_t i = k; i < n; ++i) dot += std::conj(v[i]) * a(i, j);
      dot *= beta;
      for (std::size_t i = k; i < n; ++i) a(i, j) -= v[i] * dot;
    }
    reflectors.push_back(std::move(v));
  }
  // Q = H_0 H_1 ... H_{n-2}; apply reflectors to I from the last to the first.
  DenseMatrix q = DenseMatrix::identity(n);
  for (std::size_t r = reflectors.size(); r-- > 0;) {
    const auto& v = reflectors[r];
    double vnorm2 = 0.0;
    for (const auto& x : v) vnorm2 += std::norm(x);
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    for (std::size_t j = 0; j < n; ++j) {
      Scalar dot{0.0, 0.0};
      for (std::size_t i = r; i < n; ++i) dot += std::conj(v[i]) * q(i, j);
      dot *= beta;
      for (std::size_t i = r; i < n; ++i) q(i, j) -= v[i] * dot;
    }
  }
  return q;
}

std::vector<double> log_uniform_spectrum(std::size_t n, double cond) {
  std::vector<double> lam(n, 1.0);
  if (n == 1) return lam;  // single eigenvalue pinned at 1
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(n - 1 - j) / static_cast<double>(n - 1);
    lam[j] = std::pow(cond, -t);  // 1/cond ... 1, log-uniform
  }
  return lam;
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("NN_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, OpCounter* counter) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree (" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  const std::size_t rows = a.rows(), inner = a.cols(), cols = b.cols();
  DenseMatrix out(rows, cols);
  for_row_ranges(rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        Scalar sum{0.0, 0.0};
        for (std::size_t k = 0; k < inner; ++k) sum += a(i, k) * b(k, j);
        out(i, j) = sum;
      }
  });
  if (counter) {
    if (rows == inner && inner == cols) {
      counter->add_n3(1.0);
    } else {
      const double big = static_cast<double>(std::max({rows, inner, cols}));
      counter->add_n3(static_cast<double>(rows) * static_cast<double>(inner) *
                      static_cast<double>(cols) / (big * big * big));
    }
  }
  check_finite(out, "matmul");
  return out;
}

std::vector<Scalar> matvec(const DenseMatrix& m, const std::vector<Scalar>& x) {
  if (m.cols() != x.size()) throw ShapeError("matvec: dimension mismatch");
  std::vector<Scalar> y(m.rows(), Scalar{0.0, 0.0});
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Scalar sum{0.0, 0.0};
    for (std::size_t k = 0; k < m.cols(); ++k) sum += m(i, k) * x[k];
    y[i] = sum;
  }
  return y;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b, OpCounter* counter) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("add: shape mismatch");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  if (counter) counter->add_n2();
  check_finite(out, "add");
  return out;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b, OpCounter* counter) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("sub: shape mismatch");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  if (counter) counter->add_n2();
  check_finite(out, "sub");
  return out;
}

DenseMatrix scale(const DenseMatrix& m, Scalar factor, OpCounter* counter) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = m.data()[i] * factor;
  if (counter) counter->add_n2();
  check_finite(out, "scale");
  return out;
}

DenseMatrix identity_minus(const DenseMatrix& m, OpCounter* counter) {
  if (!m.square()) throw ShapeError("identity_minus: matrix must be square");
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = (i == j ? Scalar{1.0, 0.0} : Scalar{0.0, 0.0}) - m(i, j);
  if (counter) counter->add_n2();
  check_finite(out, "identity_minus");
  return out;
}

DenseMatrix plus_identity(const DenseMatrix& m, OpCounter* counter) {
  if (!m.square()) throw ShapeError("plus_identity: matrix must be square");
  DenseMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) out(i, i) += Scalar{1.0, 0.0};
  if (counter) counter->add_n2();
  check_finite(out, "plus_identity");
  return out;
}

DenseMatrix conjugate_transpose(const DenseMatrix& m, OpCounter* counter) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
  if (counter) counter->add_n2();
  return out;
}

Scalar trace(const DenseMatrix& m) {
  if (!m.square()) throw ShapeError("trace: matrix must be square");
  Scalar t{0.0, 0.0};
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (const auto& v : m.data()) s += std::norm(v);
  return std::sqrt(s);
}

SpectralEstimate spectral_norm_estimate(const DenseMatrix& m, double tol,
                                        int max_iters, std::uint64_t seed) {
  if (!m.square()) throw ShapeError("spectral_norm_estimate: matrix must be square");
  if (tol <= 0.0) throw DomainError("spectral_norm_estimate: tol must be positive");
  const std::size_t n = m.rows();
  if (n == 0) return {0.0, true, 0};

  const DenseMatrix mh = conjugate_transpose(m);
  std::vector<Scalar> v = gaussian_probe(n, seed);
  double lambda = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    std::vector<Scalar> w = matvec(m, v);
    const double wn = vec_norm(w);
    const double next = wn * wn;  // v unit: v*(m* m)v = ||m v||^2
    std::vector<Scalar> u = matvec(mh, w);
    const double un = vec_norm(u);
    if (un == 0.0) return {std::sqrt(next), true, it};
    for (auto& x : u) x /= un;
    v = std::move(u);
    if (it > 1 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
      return {std::sqrt(next), true, it};
    }
    lambda = next;
  }
  return {std::sqrt(lambda), false, max_iters};
}

SpectralEstimate spectral_norm_estimate_shifted(const SparseMatrixCsr& w,
                                                Scalar theta, double tol,
                                                int max_iters, std::uint64_t seed) {
  if (!w.square()) throw ShapeError("spectral_norm_estimate_shifted: matrix must be square");
  const std::size_t n = w.rows();
  if (n == 0) return {0.0, true, 0};
  const auto apply = [&](const std::vector<Scalar>& x) {
    // (I - theta W) x, matrix-free
    std::vector<Scalar> y(n, Scalar{0.0, 0.0});
    for (std::size_t r = 0; r < n; ++r) {
      Scalar sum{0.0, 0.0};
      for (std::size_t k = w.row_ptr()[r]; k < w.row_ptr()[r + 1]; ++k)
        sum += w.values()[k] * x[w.col_idx()[k]];
      y[r] = x[r] - theta * sum;
    }
    return y;
  };
  std::vector<Scalar> v = gaussian_probe(n, seed);
  double lambda = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    std::vector<Scalar> s = apply(v);
    const double sn = vec_norm(s);
    const double next = sn * sn;
    std::vector<Scalar> u = apply(s);  // Hermitian operator: S* = S
    const double un = vec_norm(u);
    if (un == 0.0) return {std::sqrt(next), true, it};
    for (auto& x : u) x /= un;
    v = std::move(u);
    if (it > 1 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
      return {std::sqrt(next), true, it};
    }
    lambda = next;
  }
  return {std::sqrt(lambda), false, max_iters};
}

DenseMatrix direct_inverse_oracle(const DenseMatrix& m) {
  if (!m.square()) throw ShapeError("direct_inverse_oracle: matrix must be square");
  const std::size_t n = m.rows();
  const double pivot_floor = 1e-13 * frobenius_norm(m);

  DenseMatrix a = m;
  DenseMatrix inv = DenseMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double cand = std::abs(a(r, col));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best <= pivot_floor)
      throw SingularMatrixError(
          "direct_inverse_oracle: singular pivot at index " + std::to_string(col), col);
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    }
    const Scalar d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const Scalar f = a(r, col);
      if (f == Scalar{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  check_finite(inv, "direct_inverse_oracle");
  return inv;
}

DenseMatrix random_spd(std::size_t n, double cond, std::uint64_t seed) {
  if (n < 1) throw DomainError("random_spd: n must be >= 1");
  if (cond < 1.0) throw DomainError("random_spd: cond must be >= 1");
  GaussianStream g(seed);
  DenseMatrix gauss(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gauss(i, j) = Scalar{g.next(), 0.0};
  const DenseMatrix q = householder_q(gauss);
  const auto lam = log_uniform_spectrum(n, cond);

  DenseMatrix ql(n, n);  // Q * diag(lambda)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ql(i, j) = q(i, j) * lam[j];
  DenseMatrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Scalar sum{0.0, 0.0};
      for (std::size_t k = 0; k < n; ++k) sum += ql(i, k) * q(j, k);
      w(i, j) = sum;
    }
  // exact symmetry (the rounding dust between (i,j) and (j,i) is averaged out)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Scalar avg = (w(i, j) + w(j, i)) * 0.5;
      w(i, j) = avg;
      w(j, i) = avg;
    }
  check_finite(w, "random_spd");
  return w;
}

DenseMatrix random_conditioned_complex(std::size_t n, double cond, std::uint64_t seed) {
  if (n < 1) throw DomainError("random_conditioned_complex: n must be >= 1");
  if (cond < 1.0) throw DomainError("random_conditioned_complex: cond must be >= 1");
  GaussianStream g(seed);
  auto draw = [&g](std::size_t n_) {
    DenseMatrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = Scalar{g.next(), g.next()};
    return m;
  };
  const DenseMatrix u = householder_q(draw(n));
  const DenseMatrix v = householder_q(draw(n));
  const auto sigma = log_uniform_spectrum(n, cond);

  DenseMatrix us(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) us(i, j) = u(i, j) * sigma[j];
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Scalar sum{0.0, 0.0};
      for (std::size_t k = 0; k < n; ++k) sum += us(i, k) * std::conj(v(j, k));
      a(i, j) = sum;
    }
  check_finite(a, "random_conditioned_complex");
  return a;
}

SparseMatrixCsr random_sparse_spd(std::size_t n, double density, std::uint64_t seed) {
  if (n < 1) throw DomainError("random_sparse_spd: n must be >= 1");
  if (density < 0.0 || density > 1.0)
    throw DomainError("random_sparse_spd: density must be in [0,1]");
  std::mt19937_64 pattern(seed);
  GaussianStream values(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<SparseMatrixCsr::Triplet> t;
  std::vector<double> row_abs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = static_cast<double>(pattern() >> 11) * 0x1.0p-53;
      if (u >= density) continue;
      const double x = values.next();
      t.push_back({i, j, Scalar{x, 0.0}});
      t.push_back({j, i, Scalar{x, 0.0}});
      row_abs[i] += std::abs(x);
      row_abs[j] += std::abs(x);
    }
  for (std::size_t i = 0; i < n; ++i)
    t.push_back({i, i, Scalar{1.0 + row_abs[i], 0.0}});  // strict dominance
  return SparseMatrixCsr::build(n, n, std::move(t));
}

DenseMatrix power_ladder(const DenseMatrix& p, std::uint64_t exponent,
                         OpCounter* counter) {
  if (!p.square()) throw ShapeError("power_ladder: matrix must be square");
  if (exponent == 0) return DenseMatrix::identity(p.rows());

  DenseMatrix sq = p;
  DenseMatrix acc;
  bool have_acc = false;
  std::uint64_t e = exponent;
  while (e > 0) {
    if (e & 1) {
      acc = have_acc ? matmul(acc, sq, counter) : sq;
      have_acc = true;
    }
    e >>= 1;
    if (e > 0) sq = matmul(sq, sq, counter);
  }
  return acc;
}

DenseMatrix spmv_block(const SparseMatrixCsr& p, const DenseMatrix& x,
                       OpCounter* counter) {
  if (p.cols() != x.rows())
    throw ShapeError("spmv_block: inner dimensions disagree");
  DenseMatrix out(p.rows(), x.cols());
  for_row_ranges(p.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) {
        Scalar sum{0.0, 0.0};
        for (std::size_t k = p.row_ptr()[r]; k < p.row_ptr()[r + 1]; ++k)
          sum += p.values()[k] * x(p.col_idx()[k], c);
        out(r, c) = sum;
      }
  });
  if (counter) counter->add_spmv(static_cast<std::int64_t>(x.cols()));
  check_finite(out, "spmv_block");
  return out;
}

}  // namespace nn
