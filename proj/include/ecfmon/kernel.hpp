#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace ecfmon {

// Pair kernels W(x) = integral of cos(u'x) against a spectral weight w(u),
// evaluated on differences of m-dimensional delay vectors. Two families:
//
//   gaussian  w(u) = exp(-a ||u||^2), a > 0
//             W(x) = (pi/a)^(m/2) exp(-||x||^2 / (4a))
//   energy    w(u) = ||u||^(-(m+a)), 0 < a < 2
//             1 - cos form, W~(x) = ||x||^a up to a positive constant
//             (fixed to 1 here; calibration is scale-invariant, so the
//             constant does not move any decision)
//
// The energy weight is not integrable at the origin, so its statistic is
// only defined through the 1-cos form. Internally both families are folded
// into one signed pair weight (see PairKernel) so the distance statistic has
// a single code path and is nonnegative for both.

enum class KernelFamily { Gaussian, Energy };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double a = 1.0;
  std::size_t m = 1;        // delay-embedding dimension
  double weight_scale = 1.0;  // multiplies w(u); decisions are invariant to it

  void validate() const {
    if (m < 1) throw std::invalid_argument("kernel: m must be >= 1");
    if (!(weight_scale > 0.0) || !std::isfinite(weight_scale)) {
      throw std::invalid_argument("kernel: weight scale must be positive");
    }
    if (family == KernelFamily::Gaussian) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("kernel: gaussian bandwidth needs a > 0");
      }
    } else {
      if (!(a > 0.0 && a < 2.0)) {
        throw std::invalid_argument("kernel: energy exponent needs 0 < a < 2");
      }
    }
  }
};

// Delay embedding: returns the vectors (x_{t-m+1}, ..., x_t) for t = m..n,
// flattened row-major, n - m + 1 rows of length m.
inline std::vector<double> embed(std::span<const double> x, std::size_t m) {
  if (m < 1) throw std::invalid_argument("embed: m must be >= 1");
  if (x.size() < m) {
    throw std::invalid_argument("embed: need at least m observations");
  }
  const std::size_t rows = x.size() - m + 1;
  std::vector<double> out(rows * m);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = x[i + j];
  }
  return out;
}

inline double gaussian_pair_kernel(std::span<const double> x, double a) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("gaussian_pair_kernel: a must be > 0");
  }
  double s2 = 0.0;
  for (const double v : x) s2 += v * v;
  const double mhalf = static_cast<double>(x.size()) / 2.0;
  return std::pow(std::numbers::pi / a, mhalf) * std::exp(-s2 / (4.0 * a));
}

inline double energy_pair_kernel(std::span<const double> x, double a) {
  if (!(a > 0.0 && a < 2.0)) {
    throw std::invalid_argument("energy_pair_kernel: need 0 < a < 2");
  }
  double s2 = 0.0;
  for (const double v : x) s2 += v * v;
  return std::pow(s2, a / 2.0);
}

// Compiled evaluator for a KernelSpec. operator() returns the signed pair
// weight g:
//   gaussian  g(x) =  W(x)          (positive definite part)
//   energy    g(x) = -||x||^a
// With this sign the three-term double-sum combination in statistic.hpp
// equals the ECF L2 distance for both families: the constant that the 1-cos
// form adds cancels because the combination's coefficients sum to zero.
class PairKernel {
 public:
  explicit PairKernel(const KernelSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.family == KernelFamily::Gaussian) {
      coef_ = spec_.weight_scale *
              std::pow(std::numbers::pi / spec_.a,
                       static_cast<double>(spec_.m) / 2.0);
      inv4a_ = 1.0 / (4.0 * spec_.a);
    } else {
      coef_ = -spec_.weight_scale;
      half_exp_ = spec_.a / 2.0;
    }
  }

  std::size_t m() const { return spec_.m; }
  const KernelSpec& spec() const { return spec_; }

  double operator()(const double* x, const double* y) const {
    double s2 = 0.0;
    for (std::size_t j = 0; j < spec_.m; ++j) {
      const double d = x[j] - y[j];
      s2 += d * d;
    }
    if (spec_.family == KernelFamily::Gaussian) {
      return coef_ * std::exp(-s2 * inv4a_);
    }
    return coef_ * std::pow(s2, half_exp_);
  }

  double at_zero() const {
    return spec_.family == KernelFamily::Gaussian ? coef_ : 0.0;
  }

 private:
  KernelSpec spec_;
  double coef_ = 0.0;
  double inv4a_ = 0.0;
  double half_exp_ = 0.0;
};

}  // namespace ecfmon
