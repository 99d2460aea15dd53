#include <doctest.h>

#include <cmath>

#include "nn/errors.hpp"
#include "nn/kernels.hpp"
#include "nn/normalization.hpp"
#include "support/oracles.hpp"

using namespace nn;
using namespace nn::testing;

TEST_CASE("theta_trace on diag(1,3)") {
  const auto norm = theta_trace(DenseMatrix::diagonal({Scalar{1, 0}, Scalar{3, 0}}));
  CHECK(norm.theta == doctest::Approx(0.25));
  CHECK(norm.contraction_norm == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(norm.valid);
  CHECK(norm.kind == ThetaKind::TraceTheta1);
}

TEST_CASE("theta_trace on the identity") {
  const std::size_t n = 10;
  const auto norm = theta_trace(DenseMatrix::identity(n));
  CHECK(norm.theta == doctest::Approx(1.0 / n));
  CHECK(norm.contraction_norm == doctest::Approx(1.0 - 1.0 / n).epsilon(1e-9));
  CHECK(norm.valid);
}

TEST_CASE("theta_trace is always valid for generated SPD matrices") {
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const DenseMatrix w = random_spd(16, 1e4, seed);
    const auto norm = theta_trace(w);
    CHECK(norm.valid);
    // PSD: the largest eigenvalue is strictly below the trace
    const auto eig = jacobi_eigenvalues_real(w);
    double tr = 0.0;
    for (double e : eig) tr += e;
    CHECK(eig.back() / tr < 1.0);
  }
}

TEST_CASE("theta_trace rejects non-PSD traces") {
  CHECK_THROWS_AS(theta_trace(DenseMatrix::diagonal({Scalar{-1, 0}, Scalar{0.5, 0}})),
                  NotPsdError);
  CHECK_THROWS_AS(theta_trace(DenseMatrix::diagonal({Scalar{1, 1}, Scalar{1, 1}})),
                  NotPsdError);
}

TEST_CASE("theta_power on the identity gives k/(k+1)") {
  for (const std::size_t k : {1, 2, 8}) {
    const auto norm = theta_power(DenseMatrix::identity(6), k, 3);
    CHECK(norm.theta ==
          doctest::Approx(static_cast<double>(k) / (k + 1.0)).epsilon(1e-12));
    CHECK(norm.contraction_norm ==
          doctest::Approx(1.0 / (k + 1.0)).epsilon(1e-9));
    CHECK(norm.valid);
    CHECK(norm.kind == ThetaKind::PowerTheta2);
    CHECK(norm.k_order == k);
  }
}

TEST_CASE("theta_power on diag(1,3) with k=8") {
  // growth ratio approaches the top eigenvalue 3, so theta -> (8/9)/9
  const auto norm = theta_power(DenseMatrix::diagonal({Scalar{1, 0}, Scalar{3, 0}}), 8, 7);
  CHECK(norm.theta == doctest::Approx(8.0 / 81.0).epsilon(1e-5));
  CHECK(norm.contraction_norm == doctest::Approx(1.0 - norm.theta).epsilon(1e-6));
  CHECK(norm.valid);
}

TEST_CASE("theta_power on a scaled identity stays contractive") {
  const auto norm = theta_power(scale(DenseMatrix::identity(4), Scalar{0.1, 0}), 4, 5);
  CHECK(norm.theta == doctest::Approx((4.0 / 5.0) * 100.0).epsilon(1e-10));
  CHECK(norm.contraction_norm == doctest::Approx(1.0 / 5.0).epsilon(1e-9));
  CHECK(norm.valid);
}

TEST_CASE("theta_power raises on an annihilating probe") {
  // strictly upper-triangular: W^2 = 0, so ||W^{k+1} v|| vanishes for k >= 1
  DenseMatrix nilpotent(2, 2);
  nilpotent(0, 1) = Scalar{1, 0};
  CHECK_THROWS_AS(theta_power(nilpotent, 1, 11), DegenerateProbeError);
}

TEST_CASE("normalize scales and enforces validity") {
  const DenseMatrix w = DenseMatrix::diagonal({Scalar{1, 0}, Scalar{3, 0}});
  const auto norm = theta_trace(w);
  const DenseMatrix wt = normalize(w, norm);
  CHECK(wt(0, 0) == Scalar{0.25, 0});
  CHECK(wt(1, 1) == Scalar{0.75, 0});

  Normalization bad = norm;
  bad.valid = false;
  CHECK_THROWS_AS(normalize(w, bad), ContractionError);
}

TEST_CASE("trace normalization makes the trace exactly one") {
  for (const std::uint64_t seed : {4ULL, 5ULL}) {
    const DenseMatrix w = random_spd(24, 1e3, seed);
    const DenseMatrix wt = normalize(w, theta_trace(w));
    CHECK(std::abs(trace(wt) - Scalar{1, 0}) < 1e-14);
  }
}

TEST_CASE("normalization preserves the dominant eigendirection ordering") {
  const DenseMatrix w = random_spd(16, 1e2, 9);
  const auto norm = theta_trace(w);
  const auto before = jacobi_eigenvalues_real(w);
  const auto after = jacobi_eigenvalues_real(normalize(w, norm));
  CHECK(after.back() == doctest::Approx(before.back() * norm.theta).epsilon(1e-12));
  CHECK(after.front() == doctest::Approx(before.front() * norm.theta).epsilon(1e-10));
}

TEST_CASE("contraction_check") {
  const DenseMatrix wt = DenseMatrix::diagonal({Scalar{0.25, 0}, Scalar{0.75, 0}});

  const DenseMatrix inv = direct_inverse_oracle(wt);
  CHECK(contraction_check(inv, wt) < 1e-9);

  CHECK(contraction_check(DenseMatrix::identity(2), wt) ==
        doctest::Approx(0.75).epsilon(1e-9));

  CHECK(contraction_check(DenseMatrix(2, 2), wt) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sparse theta_trace matches the densified computation") {
  const SparseMatrixCsr s = random_sparse_spd(24, 0.2, 13);
  const auto sparse_norm = theta_trace(s);
  const auto dense_norm = theta_trace(s.densify());
  CHECK(sparse_norm.theta == doctest::Approx(dense_norm.theta).epsilon(1e-14));
  CHECK(sparse_norm.contraction_norm ==
        doctest::Approx(dense_norm.contraction_norm).epsilon(1e-8));
  CHECK(sparse_norm.valid == dense_norm.valid);
}
