#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ecfmon {

// Neumaier-compensated accumulator. Double sums of kernel values reach ~1e6
// terms; plain summation would eat half the tolerance budget of the
// incremental-vs-batch equality checks.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

// 1-based order-statistic index floor(n*q), guarded against the product
// landing a few ulps under an integer (e.g. 1000 * 0.95).
inline std::size_t floor_order_index(std::size_t n, double q) {
  const double x = static_cast<double>(n) * q;
  const double f = std::floor(x + 1e-9);
  if (f < 1.0) {
    throw std::invalid_argument(
        "order statistic undefined: n*q < 1, increase the replicate count");
  }
  const auto idx = static_cast<std::size_t>(f);
  return idx > n ? n : idx;
}

// 1-based order-statistic index ceil(n*q), same guard on the other side.
inline std::size_t ceil_order_index(std::size_t n, double q) {
  const double x = static_cast<double>(n) * q;
  const double c = std::ceil(x - 1e-9);
  if (c < 1.0) {
    throw std::invalid_argument(
        "order statistic undefined: n*q < 1, increase the replicate count");
  }
  const auto idx = static_cast<std::size_t>(c);
  return idx > n ? n : idx;
}

}  // namespace ecfmon
