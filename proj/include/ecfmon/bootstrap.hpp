#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecfmon/detector.hpp"
#include "ecfmon/numeric.hpp"
#include "ecfmon/parallel.hpp"
#include "ecfmon/rng.hpp"
#include "ecfmon/statistic.hpp"

namespace ecfmon {

// Stationary bootstrap calibration of the detector threshold.
//
// Each replicate resamples the training series in blocks of geometric length
// (mean 1/p_B) with uniform random starts and circular wrap-around, builds a
// pseudo sample of T + floor(L*T) values, treats the first T as training and
// records the maximum of the normalized detector statistic over the pseudo
// monitoring period t = 1..floor(L*T). The threshold estimate is the
// floor(B(1-alpha))-th order statistic of the B maxima, and the p-value of an
// observed maximum is the fraction of replicate maxima at or above it.
//
// The automatic choice of p_B follows the standard data-driven optimal
// expected block length for the stationary bootstrap: flat-top lag-window
// weighting of the sample autocovariances, with the bandwidth picked by the
// first window of persistently insignificant autocorrelations (falling back
// to the largest significant lag).

struct BlockSelection {
  double p_B = 1.0;       // 1 / expected block length, in (0, 1]
  double b_star = 1.0;    // expected block length before inversion
  bool degenerate = false;  // constant input, iid resampling forced
};

namespace detail {

// lag-k autocovariance with divisor n (biased form)
inline double autocov(std::span<const double> x, double mean, std::size_t k) {
  const std::size_t n = x.size();
  if (k >= n) return 0.0;
  KahanSum s;
  for (std::size_t t = 0; t + k < n; ++t) {
    s.add((x[t] - mean) * (x[t + k] - mean));
  }
  return s.value() / static_cast<double>(n);
}

// trapezoidal flat-top window
inline double flat_top(double s) {
  const double as = std::abs(s);
  if (as <= 0.5) return 1.0;
  if (as <= 1.0) return 2.0 * (1.0 - as);
  return 0.0;
}

}  // namespace detail

inline BlockSelection select_p_B(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return {1.0, 1.0, true};

  KahanSum ms;
  for (const double v : x) ms.add(v);
  const double mean = ms.value() / static_cast<double>(n);
  const double r0 = detail::autocov(x, mean, 0);
  if (!(r0 > 0.0)) return {1.0, 1.0, true};

  const double dn = static_cast<double>(n);
  const std::size_t k_n =
      std::max<std::size_t>(5, static_cast<std::size_t>(
                                   std::ceil(std::log10(dn))));
  const std::size_t m_max =
      static_cast<std::size_t>(std::ceil(std::sqrt(dn))) + k_n;
  const double b_max = std::ceil(std::min(3.0 * std::sqrt(dn), dn / 3.0));

  std::vector<double> rho(m_max + 1, 0.0);
  for (std::size_t k = 1; k <= m_max; ++k) {
    rho[k] = detail::autocov(x, mean, k) / r0;
  }

  // two-sided 95% band for autocorrelations of white noise
  const double crit = 1.959963984540054 * std::sqrt(std::log10(dn) / dn);

  // smallest lag followed by k_n consecutive insignificant autocorrelations
  std::size_t m_hat = 0;
  bool found = false;
  if (m_max >= k_n) {
    for (std::size_t j = 1; j + k_n - 1 <= m_max && !found; ++j) {
      bool all_insig = true;
      for (std::size_t k = j; k < j + k_n; ++k) {
        if (std::abs(rho[k]) >= crit) {
          all_insig = false;
          break;
        }
      }
      if (all_insig) {
        m_hat = j;
        found = true;
      }
    }
  }
  if (!found) {
    for (std::size_t k = 1; k <= m_max; ++k) {
      if (std::abs(rho[k]) >= crit) m_hat = k;
    }
    if (m_hat == 0) m_hat = 1;
  }

  const std::size_t big_m = std::min(2 * m_hat, m_max);
  double g_hat = 0.0;
  double d_sum = 0.0;
  for (std::size_t k = 0; k <= big_m; ++k) {
    const double w =
        detail::flat_top(static_cast<double>(k) / static_cast<double>(big_m));
    const double r = detail::autocov(x, mean, k);
    const double two = k == 0 ? 1.0 : 2.0;  // fold negative lags
    g_hat += two * w * static_cast<double>(k) * r;
    d_sum += two * w * r;
  }
  const double d_sb = 2.0 * d_sum * d_sum;

  double b_star = 1.0;
  if (d_sb > 0.0 && std::isfinite(g_hat)) {
    b_star = std::cbrt(2.0 * g_hat * g_hat / d_sb) * std::cbrt(dn);
  }
  if (!std::isfinite(b_star)) b_star = 1.0;
  b_star = std::clamp(b_star, 1.0, std::min(b_max, dn));
  return {1.0 / b_star, b_star, false};
}

// One stationary bootstrap pseudo sample of length n_out. Start indices are
// uniform on the data, block lengths geometric with mean 1/p_B, indices wrap
// circularly.
inline std::vector<double> stationary_bootstrap_sample(
    std::span<const double> x, std::size_t n_out, double p_B, Rng& rng) {
  if (x.empty()) {
    throw std::invalid_argument("bootstrap: empty source sample");
  }
  if (!(p_B > 0.0 && p_B <= 1.0)) {
    throw std::invalid_argument("bootstrap: p_B must be in (0, 1]");
  }
  const std::size_t n = x.size();
  std::vector<double> out;
  out.reserve(n_out);
  while (out.size() < n_out) {
    std::size_t pos = static_cast<std::size_t>(rng.uniform_index(n));
    std::uint64_t len = rng.geometric1(p_B);
    for (std::uint64_t j = 0; j < len && out.size() < n_out; ++j) {
      out.push_back(x[(pos + j) % n]);
    }
  }
  return out;
}

// Maximum of the normalized detector statistic over one bootstrap replicate,
// t = 1..horizon. The first `train_len(x)` pseudo observations play the role
// of the training sample.
inline double replicate_max_delta(std::span<const double> training,
                                  const MonitorConfig& config,
                                  std::size_t horizon, double p_B, Rng& rng) {
  const std::size_t T = training.size();
  const std::vector<double> pseudo =
      stationary_bootstrap_sample(training, T + horizon, p_B, rng);
  EcfAccumulator acc({pseudo.data(), T}, config.kernel);
  double max_delta = 0.0;
  for (std::size_t i = 0; i < horizon; ++i) {
    acc.push(pseudo[T + i]);
    const double d = acc.current_d(config.variant);
    const double delta =
        delta_stat(d, T, acc.t(), config.kernel.m, config.gamma);
    if (i == 0 || delta > max_delta) max_delta = delta;
  }
  return max_delta;
}

struct BootstrapConfig {
  std::size_t B = 1000;
  double p_B = 0.0;  // 0 requests automatic selection from the training data
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
    if (p_B != 0.0 && !(p_B > 0.0 && p_B <= 1.0)) {
      throw std::invalid_argument("bootstrap: p_B must be in (0, 1]");
    }
  }
};

struct CalibrationResult {
  double c_hat = 0.0;
  std::vector<double> maxima;  // sorted ascending, size B
  double p_B_used = 1.0;
  bool p_B_degenerate = false;
  std::uint64_t seed = 0;
};

// Runs B replicates with per-replicate seeds derived from the master seed,
// so the result is independent of the thread count.
inline CalibrationResult calibrate(std::span<const double> training,
                                   const MonitorConfig& config,
                                   const BootstrapConfig& boot) {
  config.validate();
  boot.validate();
  if (training.size() < config.kernel.m) {
    throw std::invalid_argument("calibrate: training shorter than m");
  }
  const std::size_t idx = floor_order_index(boot.B, 1.0 - config.alpha);

  CalibrationResult result;
  result.seed = boot.seed;
  if (boot.p_B == 0.0) {
    const BlockSelection sel = select_p_B(training);
    result.p_B_used = sel.p_B;
    result.p_B_degenerate = sel.degenerate;
  } else {
    result.p_B_used = boot.p_B;
  }

  const std::size_t horizon = config.horizon(training.size());
  result.maxima.assign(boot.B, 0.0);
  parallel_for(boot.B, boot.threads, [&](std::size_t b) {
    Rng rng(subseed(boot.seed, b));
    result.maxima[b] =
        replicate_max_delta(training, config, horizon, result.p_B_used, rng);
  });
  std::sort(result.maxima.begin(), result.maxima.end());
  result.c_hat = result.maxima[idx - 1];
  return result;
}

// Fraction of replicate maxima at or above the observed maximum.
inline double p_value(std::span<const double> maxima, double observed) {
  if (maxima.empty()) {
    throw std::invalid_argument("p_value: no replicate maxima");
  }
  std::size_t count = 0;
  for (const double mx : maxima) {
    if (mx >= observed) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(maxima.size());
}

}  // namespace ecfmon
