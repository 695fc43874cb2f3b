#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecfmon/bootstrap.hpp"
#include "ecfmon/detector.hpp"
#include "ecfmon/numeric.hpp"
#include "ecfmon/parallel.hpp"
#include "ecfmon/rng.hpp"

namespace ecfmon {

// Data generating processes for the size and power experiments. S-processes
// are stationary, P-processes break during the monitoring period:
//
//   S1  iid N(0,1)
//   S2  AR(1), coefficient 0.5
//   S3  ARCH(1),  h^2 = 0.2 + 0.3 x^2
//   S4  GARCH(1,1), h^2 = 0.1 + 0.3 x^2 + 0.3 h^2
//   S5  integrated GARCH, h^2 = 0.1 + 0.7 x^2 + 0.3 h^2
//   S6  random-coefficient AR, beta_t = 0.5 beta_{t-1} + eta_t, sd 0.1
//   S7  iid standard Cauchy
//   P1  mean shift +1 after the break point
//   P2  scale doubles after the break point
//   P3  N(1,2)-type (1 + sqrt(2) eps) before, eps^2 after (same mean and
//       variance, different law)
//   P4  smooth variance damping exp(1/2 - |1/2 - (T-t)/(L T)|) after T
//   P5  switch to a skewed alpha = 1 stable law after the break point
//
// The break point V = T (1 + U L) with U uniform on (0, 4/5) is drawn per
// path. Recursions start at x_0 = 0 and run through a discarded spin-up
// (default 500 points) so the training segment starts in the stationary
// regime; burn_in = 0 reproduces the bare textbook recursion start.

enum class Dgp { S1, S2, S3, S4, S5, S6, S7, P1, P2, P3, P4, P5 };

inline Dgp dgp_from_string(const std::string& name) {
  if (name == "S1") return Dgp::S1;
  if (name == "S2") return Dgp::S2;
  if (name == "S3") return Dgp::S3;
  if (name == "S4") return Dgp::S4;
  if (name == "S5") return Dgp::S5;
  if (name == "S6") return Dgp::S6;
  if (name == "S7") return Dgp::S7;
  if (name == "P1") return Dgp::P1;
  if (name == "P2") return Dgp::P2;
  if (name == "P3") return Dgp::P3;
  if (name == "P4") return Dgp::P4;
  if (name == "P5") return Dgp::P5;
  throw std::invalid_argument("unknown process name: " + name);
}

inline std::string dgp_name(Dgp d) {
  switch (d) {
    case Dgp::S1: return "S1";
    case Dgp::S2: return "S2";
    case Dgp::S3: return "S3";
    case Dgp::S4: return "S4";
    case Dgp::S5: return "S5";
    case Dgp::S6: return "S6";
    case Dgp::S7: return "S7";
    case Dgp::P1: return "P1";
    case Dgp::P2: return "P2";
    case Dgp::P3: return "P3";
    case Dgp::P4: return "P4";
    case Dgp::P5: return "P5";
  }
  return "?";
}

struct DgpSpec {
  Dgp name = Dgp::S1;
  std::size_t T = 100;    // training length
  double L = 1.0;         // monitoring horizon multiplier
  std::size_t burn_in = 500;  // spin-up for the recursive processes

  void validate() const {
    if (T < 2) throw std::invalid_argument("dgp: T must be >= 2");
    if (!(L > 0.0)) throw std::invalid_argument("dgp: L must be positive");
  }

  std::size_t horizon() const {
    return static_cast<std::size_t>(
        std::floor(L * static_cast<double>(T) + 1e-9));
  }
};

struct DgpPath {
  std::vector<double> x;   // length T + floor(L*T)
  std::size_t train_len = 0;
  double v_break = 0.0;    // break point; 0 for the stationary processes
};

inline DgpPath dgp_generate(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t T = spec.T;
  const std::size_t n = T + spec.horizon();
  DgpPath path;
  path.train_len = T;
  path.x.resize(n);

  const bool recursive = spec.name == Dgp::S2 || spec.name == Dgp::S3 ||
                         spec.name == Dgp::S4 || spec.name == Dgp::S5 ||
                         spec.name == Dgp::S6;
  const std::size_t burn = recursive ? spec.burn_in : 0;

  // break point first so the innovation stream does not depend on it
  double v = 0.0;
  if (spec.name == Dgp::P1 || spec.name == Dgp::P2 || spec.name == Dgp::P3 ||
      spec.name == Dgp::P5) {
    const double u = 0.8 * rng.uniform01();
    v = static_cast<double>(T) * (1.0 + u * spec.L);
    path.v_break = v;
  }

  double x_prev = 0.0;
  double h2_prev = 0.0;  // squared volatility state
  double beta_prev = 0.0;
  if (spec.name == Dgp::S4) h2_prev = 0.25;  // unconditional variance
  if (spec.name == Dgp::S5) h2_prev = 0.1;

  const double lt = spec.L * static_cast<double>(T);
  for (std::size_t i = 0; i < burn + n; ++i) {
    const bool keep = i >= burn;
    const std::size_t t = keep ? i - burn + 1 : 0;  // 1-based once kept
    double xt = 0.0;
    switch (spec.name) {
      case Dgp::S1:
        xt = rng.normal();
        break;
      case Dgp::S2:
        xt = 0.5 * x_prev + rng.normal();
        break;
      case Dgp::S3: {
        const double h2 = 0.2 + 0.3 * x_prev * x_prev;
        xt = std::sqrt(h2) * rng.normal();
        break;
      }
      case Dgp::S4: {
        const double h2 = 0.1 + 0.3 * x_prev * x_prev + 0.3 * h2_prev;
        xt = std::sqrt(h2) * rng.normal();
        h2_prev = h2;
        break;
      }
      case Dgp::S5: {
        const double h2 = 0.1 + 0.7 * x_prev * x_prev + 0.3 * h2_prev;
        xt = std::sqrt(h2) * rng.normal();
        h2_prev = h2;
        break;
      }
      case Dgp::S6: {
        const double beta = 0.5 * beta_prev + 0.1 * rng.normal();
        xt = beta * x_prev + rng.normal();
        beta_prev = beta;
        break;
      }
      case Dgp::S7:
        xt = rng.cauchy();
        break;
      case Dgp::P1:
        xt = rng.normal() + (static_cast<double>(t) > v ? 1.0 : 0.0);
        break;
      case Dgp::P2:
        xt = rng.normal() * (static_cast<double>(t) > v ? 2.0 : 1.0);
        break;
      case Dgp::P3: {
        const double eps = rng.normal();
        xt = static_cast<double>(t) > v ? eps * eps
                                        : 1.0 + std::sqrt(2.0) * eps;
        break;
      }
      case Dgp::P4: {
        const double eps = rng.normal();
        if (static_cast<double>(t) > static_cast<double>(T)) {
          const double arg =
              (static_cast<double>(T) - static_cast<double>(t)) / lt;
          xt = eps * std::exp(0.5 - std::abs(0.5 - arg));
        } else {
          xt = eps;
        }
        break;
      }
      case Dgp::P5:
        xt = static_cast<double>(t) > v ? rng.stable1(0.25) : rng.normal();
        break;
    }
    x_prev = xt;
    if (keep) path.x[t - 1] = xt;
  }
  return path;
}

struct WarpSpeedResult {
  double rate = 0.0;       // rejection frequency
  double c_star = 0.0;     // pooled (1-alpha) quantile of replicate maxima
  std::size_t rejections = 0;
  std::size_t reps = 0;
  std::vector<double> observed_max;  // per repetition
  std::vector<double> replicate_max;
};

// Warp-speed Monte Carlo: one bootstrap replicate per repetition, pooled into
// a single critical value. Repetition r derives everything (path, block
// probability, bootstrap draws) from subseed(master, r), so the result is
// reproducible for any thread count.
inline WarpSpeedResult warp_speed_mc(const DgpSpec& spec,
                                     const MonitorConfig& config,
                                     std::size_t reps,
                                     std::uint64_t master_seed,
                                     std::size_t threads = 1) {
  spec.validate();
  config.validate();
  if (reps < 2) throw std::invalid_argument("warp_speed: need reps >= 2");
  if (std::abs(spec.L - config.L) > 1e-12) {
    throw std::invalid_argument(
        "warp_speed: process and monitor disagree about the horizon L");
  }

  const std::size_t T = spec.T;
  const std::size_t horizon = spec.horizon();
  WarpSpeedResult out;
  out.reps = reps;
  out.observed_max.assign(reps, 0.0);
  out.replicate_max.assign(reps, 0.0);

  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng(subseed(master_seed, r));
    const DgpPath path = dgp_generate(spec, rng);
    const std::span<const double> training(path.x.data(), T);

    EcfAccumulator acc(training, config.kernel);
    double max_delta = 0.0;
    for (std::size_t i = 0; i < horizon; ++i) {
      acc.push(path.x[T + i]);
      const double d = acc.current_d(config.variant);
      const double delta =
          delta_stat(d, T, acc.t(), config.kernel.m, config.gamma);
      if (i == 0 || delta > max_delta) max_delta = delta;
    }
    out.observed_max[r] = max_delta;

    const BlockSelection sel = select_p_B(training);
    out.replicate_max[r] =
        replicate_max_delta(training, config, horizon, sel.p_B, rng);
  });

  std::vector<double> sorted = out.replicate_max;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = ceil_order_index(reps, 1.0 - config.alpha);
  out.c_star = sorted[idx - 1];
  for (const double mx : out.observed_max) {
    if (mx > out.c_star) ++out.rejections;
  }
  out.rate = static_cast<double>(out.rejections) / static_cast<double>(reps);
  return out;
}

}  // namespace ecfmon
