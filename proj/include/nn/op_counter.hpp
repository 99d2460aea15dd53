#pragma once

#include <atomic>
#include <cstdint>

namespace nn {

/// Tally of the heavy operations performed by the kernels.
///
/// n3_multiplies counts full matrix-matrix products: a square product of
/// equal sizes adds 1, a rectangular product adds the fractional
/// rows*inner*cols / max_dim^3 equivalent.  n2_ops counts matrix-level
/// add/scale/copy passes.  spmv_count counts sparse-matrix column
/// applications (one per right-hand-side column per product).
///
/// Counts are monotone within a run; reset() is for run boundaries only.
/// Increments are atomic, so one counter may be shared across workers.
class OpCounter {
 public:
  OpCounter() = default;
  OpCounter(const OpCounter&) = delete;
  OpCounter& operator=(const OpCounter&) = delete;

  void add_n3(double units) { n3_.fetch_add(units, std::memory_order_relaxed); }
  void add_n2(std::int64_t k = 1) { n2_.fetch_add(k, std::memory_order_relaxed); }
  void add_spmv(std::int64_t k) { spmv_.fetch_add(k, std::memory_order_relaxed); }

  double n3_multiplies() const { return n3_.load(std::memory_order_relaxed); }
  std::int64_t n2_ops() const { return n2_.load(std::memory_order_relaxed); }
  std::int64_t spmv_count() const { return spmv_.load(std::memory_order_relaxed); }

  void reset() {
    n3_.store(0.0, std::memory_order_relaxed);
    n2_.store(0, std::memory_order_relaxed);
    spmv_.store(0, std::memory_order_relaxed);
  }

 private:
  std::atomic<double> n3_{0.0};
  std::atomic<std::int64_t> n2_{0};
  std::atomic<std::int64_t> spmv_{0};
};

}  // namespace nn
