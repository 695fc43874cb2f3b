#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ecfmon/statistic.hpp"

namespace ecfmon {

// Detector normalization and the sequential stopping rule.
//
// The monitored statistic is
//
//   Delta(T, t) = ((T + t - m + 1)^2 / (T - m + 1)) * D(T, t) / q(t/T)^2
//
// with the boundary q(s) = (1 + s) (s / (1 + s))^gamma, gamma in [0, 1/2).
// Monitoring stops at the first t in {2, ..., floor(L*T)} with
// Delta > c_alpha; Delta is still computed and reported at t = 1, the scan
// just starts one step later.

inline double q_gamma(double s, double gamma) {
  if (s < 0.0) throw std::invalid_argument("q_gamma: s must be >= 0");
  if (!(gamma >= 0.0 && gamma < 0.5)) {
    throw std::invalid_argument("q_gamma: gamma must be in [0, 0.5)");
  }
  if (gamma == 0.0) return 1.0 + s;
  return (1.0 + s) * std::pow(s / (1.0 + s), gamma);
}

inline double delta_stat(double d, std::size_t train_len, std::size_t t,
                         std::size_t m, double gamma) {
  if (m > train_len) {
    throw std::invalid_argument("delta_stat: m exceeds the training length");
  }
  const double T = static_cast<double>(train_len);
  const double num = T + static_cast<double>(t) - static_cast<double>(m) + 1.0;
  const double den = T - static_cast<double>(m) + 1.0;
  const double q = q_gamma(static_cast<double>(t) / T, gamma);
  return (num * num / den) * d / (q * q);
}

struct MonitorConfig {
  KernelSpec kernel;
  StatVariant variant = StatVariant::Cumulative;
  double gamma = 0.0;  // boundary exponent, [0, 0.5)
  double L = 1.0;      // monitoring horizon = floor(L * T) observations
  double alpha = 0.05;

  void validate() const {
    kernel.validate();
    if (!(gamma >= 0.0 && gamma < 0.5)) {
      throw std::invalid_argument("monitor: gamma must be in [0, 0.5)");
    }
    if (!(L > 0.0) || !std::isfinite(L)) {
      throw std::invalid_argument("monitor: L must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("monitor: alpha must be in (0, 1)");
    }
  }

  std::size_t horizon(std::size_t train_len) const {
    const double h = std::floor(L * static_cast<double>(train_len) + 1e-9);
    return static_cast<std::size_t>(h);
  }
};

constexpr std::size_t kNoBreak = std::numeric_limits<std::size_t>::max();

struct StoppingResult {
  std::size_t tau = kNoBreak;        // monitoring step of the first exceedance
  std::vector<double> trajectory;    // Delta at t = 1..#consumed
  double max_delta = 0.0;            // over the computed trajectory
  double critical_value = 0.0;
  std::optional<double> p_value;     // filled when replicate maxima are given

  bool detected() const { return tau != kNoBreak; }
};

// Feeds up to floor(L*T) observations from `stream` into the accumulator and
// applies the stopping rule. A stream that ends early simply leaves tau at
// no-break. When the sorted calibration maxima are supplied, the p-value is
// the fraction of them at or above the maximum computed Delta.
inline StoppingResult run_monitor(EcfAccumulator& acc,
                                  std::span<const double> stream,
                                  const MonitorConfig& config, double c_alpha,
                                  std::span<const double> replicate_maxima = {}) {
  config.validate();
  const KernelSpec& ak = acc.kernel();
  if (config.kernel.m != ak.m || config.kernel.family != ak.family ||
      config.kernel.a != ak.a || config.kernel.weight_scale != ak.weight_scale) {
    throw std::invalid_argument(
        "run_monitor: accumulator was built with a different kernel");
  }
  const std::size_t T = acc.train_len();
  const std::size_t horizon = config.horizon(T);

  StoppingResult result;
  result.critical_value = c_alpha;

  const std::size_t n_push =
      stream.size() < horizon ? stream.size() : horizon;
  for (std::size_t i = 0; i < n_push; ++i) {
    acc.push(stream[i]);
    const std::size_t t = acc.t();
    const double d = acc.current_d(config.variant);
    const double delta =
        delta_stat(d, T, t, config.kernel.m, config.gamma);
    result.trajectory.push_back(delta);
    if (delta > result.max_delta || t == 1) result.max_delta = delta;
    if (t >= 2 && delta > c_alpha) {
      result.tau = t;
      break;
    }
  }

  if (!replicate_maxima.empty()) {
    std::size_t count = 0;
    for (const double mx : replicate_maxima) {
      if (mx >= result.max_delta) ++count;
    }
    result.p_value = static_cast<double>(count) /
                     static_cast<double>(replicate_maxima.size());
  }
  return result;
}

struct RetroResult {
  std::size_t split = 0;     // argmax over candidate split points
  double max_stat = 0.0;
  std::vector<std::pair<std::size_t, double>> trajectory;  // (t, stat)
};

// Retrospective scan over split points t in [m+1, n-m]: the two segments are
// re-embedded separately (their delay vectors never straddle the split) and
// compared through the same kernel distance, weighted by the two-sample
// factor n1*n2/(n1+n2) on embedding counts. Ties go to the smallest t.
//
// Incremental bookkeeping: moving the split right adds embedding t+1 to the
// left segment and removes embedding t+m from the right one, so each step is
// two kernel rows, O(n) evaluations.
inline RetroResult retrospective_scan(std::span<const double> x,
                                      const KernelSpec& kernel) {
  kernel.validate();
  const std::size_t m = kernel.m;
  const std::size_t n = x.size();
  if (n < 2 * m + 2) {
    throw std::invalid_argument(
        "retrospective_scan: need at least 2m+2 observations");
  }
  const PairKernel g(kernel);
  const std::vector<double> emb = embed(x, m);
  const std::size_t rows = n - m + 1;  // embedding index i covers x[i..i+m)

  const auto row_ptr = [&](std::size_t i) { return emb.data() + i * m; };
  // sum of g(e_i - e_k) for k in [lo, hi)
  const auto row_sum = [&](std::size_t i, std::size_t lo, std::size_t hi) {
    KahanSum r;
    const double* xi = row_ptr(i);
    for (std::size_t k = lo; k < hi; ++k) r.add(g(xi, row_ptr(k)));
    return r.value();
  };

  // Split t (1-based observation index): left segment x[0..t), embeddings
  // [0, t-m+1); right segment x[t..n), embeddings [t, rows) of the full
  // series (re-embedding within the segment lands on the same windows).
  const std::size_t t_first = m + 1;
  const std::size_t t_last = n - m;

  // initialize at t_first
  std::size_t l_hi = t_first - m + 1;  // left embeddings [0, l_hi)
  std::size_t r_lo = t_first;          // right embeddings [r_lo, rows)
  const double w0 = g.at_zero();

  double s_ll = 0.0, s_rr = 0.0, s_lr = 0.0;
  {
    KahanSum ll, rr, lr;
    for (std::size_t i = 0; i < l_hi; ++i) ll.add(row_sum(i, 0, l_hi));
    for (std::size_t i = r_lo; i < rows; ++i) rr.add(row_sum(i, r_lo, rows));
    for (std::size_t i = 0; i < l_hi; ++i) lr.add(row_sum(i, r_lo, rows));
    s_ll = ll.value();
    s_rr = rr.value();
    s_lr = lr.value();
  }

  RetroResult result;
  const auto record = [&](std::size_t t) {
    const double n1 = static_cast<double>(l_hi);
    const double n2 = static_cast<double>(rows - r_lo);
    const double d = detail::combine(s_ll, s_rr, s_lr,
                                     l_hi, rows - r_lo);
    const double stat = (n1 * n2 / (n1 + n2)) * d;
    result.trajectory.emplace_back(t, stat);
    if (result.trajectory.size() == 1 || stat > result.max_stat) {
      result.max_stat = stat;
      result.split = t;
    }
  };
  record(t_first);

  for (std::size_t t = t_first + 1; t <= t_last; ++t) {
    // left gains embedding index t-m (covers x[t-m..t)), right loses index t-1
    const std::size_t in_l = t - m;
    const std::size_t out_r = t - 1;
    // order: remove from the right first so cross sums stay consistent
    s_rr -= 2.0 * row_sum(out_r, out_r + 1, rows) + w0;
    s_lr -= row_sum(out_r, 0, l_hi);
    r_lo = t;
    s_ll += 2.0 * row_sum(in_l, 0, l_hi) + w0;
    s_lr += row_sum(in_l, r_lo, rows);
    l_hi = in_l + 1;
    record(t);
  }
  return result;
}

}  // namespace ecfmon
