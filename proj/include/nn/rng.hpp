#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace nn {

/// Deterministic standard-normal stream.
///
/// Box-Muller on top of mt19937_64 instead of std::normal_distribution,
/// whose output is implementation-defined; the same seed must reproduce the
/// same matrices on any standard library.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1], u2 in [0,1)
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  std::vector<double> take(std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = next();
    return out;
  }

 private:
  double uniform01() {
    // 53-bit mantissa out of the 64-bit word
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nn
