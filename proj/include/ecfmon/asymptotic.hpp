#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecfmon/detector.hpp"
#include "ecfmon/kernel.hpp"
#include "ecfmon/numeric.hpp"
#include "ecfmon/parallel.hpp"
#include "ecfmon/rng.hpp"

namespace ecfmon {

// Simulated asymptotic critical values. Under stationarity the normalized
// detector converges to
//
//   sup over s in [eta/(1+eta), L/(1+L)] of  B(s)' M B(s) / s^(2 gamma)
//
// with B a planar Brownian motion and M the integral of the long-run
// covariance of (cos(u'Y), sin(u'Y)) against the gaussian weight. M is
// estimated from the training sample: flat (untruncated-weight) autocovariance
// sums to lag h_T, integrated by Monte Carlo draws of u from the gaussian
// weight normalized to a density. gamma > 0 makes the boundary pinch the
// origin, so a positive eta is required there.

struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;
};

// Long-run covariance at frequency point u of the embedded cos/sin pair,
// lags -h_T..h_T, each lag normalized by the number of its summands. At
// u = 0 the centered coordinates vanish identically and so does the matrix.
inline Sym2 sigma_hat(std::span<const double> training, std::size_t m,
                      std::span<const double> u, std::size_t h_T) {
  if (u.size() != m) {
    throw std::invalid_argument("sigma_hat: u must have length m");
  }
  if (training.size() < m) {
    throw std::invalid_argument("sigma_hat: training shorter than m");
  }
  const std::vector<double> emb = embed(training, m);
  const std::size_t n = training.size() - m + 1;
  if (h_T + 1 > n) {
    throw std::invalid_argument("sigma_hat: truncation lag h_T must be < n");
  }

  std::vector<double> fc(n);
  std::vector<double> fs(n);
  for (std::size_t j = 0; j < n; ++j) {
    double ang = 0.0;
    for (std::size_t d = 0; d < m; ++d) ang += u[d] * emb[j * m + d];
    fc[j] = std::cos(ang);
    fs[j] = std::sin(ang);
  }
  KahanSum mc;
  KahanSum msn;
  for (std::size_t j = 0; j < n; ++j) {
    mc.add(fc[j]);
    msn.add(fs[j]);
  }
  const double mu_c = mc.value() / static_cast<double>(n);
  const double mu_s = msn.value() / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    fc[j] -= mu_c;
    fs[j] -= mu_s;
  }

  Sym2 sum;
  for (std::size_t h = 0; h <= h_T; ++h) {
    KahanSum scc;
    KahanSum scs;
    KahanSum ssc;
    KahanSum sss;
    for (std::size_t j = 0; j + h < n; ++j) {
      scc.add(fc[j] * fc[j + h]);
      scs.add(fc[j] * fs[j + h]);
      ssc.add(fs[j] * fc[j + h]);
      sss.add(fs[j] * fs[j + h]);
    }
    const double norm = 1.0 / static_cast<double>(n - h);
    if (h == 0) {
      sum.a11 += scc.value() * norm;
      sum.a12 += 0.5 * (scs.value() + ssc.value()) * norm;
      sum.a22 += sss.value() * norm;
    } else {
      // lag h and lag -h together; (A + A') / 2 keeps the matrix symmetric
      sum.a11 += 2.0 * scc.value() * norm;
      sum.a12 += (scs.value() + ssc.value()) * norm;
      sum.a22 += 2.0 * sss.value() * norm;
    }
  }
  return sum;
}

struct WeightedCov {
  Sym2 m;       // integral estimate
  Sym2 se;      // elementwise Monte Carlo standard errors
  std::size_t n_u = 0;
};

// Integral of sigma_hat(u) against scale * exp(-a ||u||^2) du, by Monte Carlo:
// the weight is (pi/a)^(m/2) * scale times the N(0, (2a)^-1 I) density, so M
// is that constant times a plain average over gaussian draws of u.
inline WeightedCov integrate_sigma_w(std::span<const double> training,
                                     const KernelSpec& kernel, std::size_t n_u,
                                     std::size_t h_T, Rng& rng) {
  kernel.validate();
  if (kernel.family != KernelFamily::Gaussian) {
    throw std::invalid_argument(
        "integrate_sigma_w: only the gaussian weight is a finite measure");
  }
  if (n_u < 2) {
    throw std::invalid_argument("integrate_sigma_w: need at least 2 draws");
  }
  const std::size_t m = kernel.m;
  const double sd_u = 1.0 / std::sqrt(2.0 * kernel.a);
  const double mass =
      kernel.weight_scale *
      std::pow(std::numbers::pi / kernel.a, static_cast<double>(m) / 2.0);

  KahanSum s11;
  KahanSum s12;
  KahanSum s22;
  KahanSum q11;
  KahanSum q12;
  KahanSum q22;
  std::vector<double> u(m);
  for (std::size_t i = 0; i < n_u; ++i) {
    for (std::size_t d = 0; d < m; ++d) u[d] = sd_u * rng.normal();
    const Sym2 s = sigma_hat(training, m, u, h_T);
    s11.add(s.a11);
    s12.add(s.a12);
    s22.add(s.a22);
    q11.add(s.a11 * s.a11);
    q12.add(s.a12 * s.a12);
    q22.add(s.a22 * s.a22);
  }
  const double dn = static_cast<double>(n_u);
  WeightedCov out;
  out.n_u = n_u;
  out.m = {mass * s11.value() / dn, mass * s12.value() / dn,
           mass * s22.value() / dn};
  const auto se = [&](const KahanSum& s, const KahanSum& q) {
    const double mean = s.value() / dn;
    const double var = std::max(0.0, q.value() / dn - mean * mean);
    return mass * std::sqrt(var / dn);
  };
  out.se = {se(s11, q11), se(s12, q12), se(s22, q22)};
  return out;
}

// Clips negative eigenvalues to zero. Estimates a hair below PSD (within
// -1e-10 of it) come out exactly PSD; anything worse is clipped too.
inline Sym2 project_psd(const Sym2& s) {
  const double tr = s.a11 + s.a22;
  const double half_diff = (s.a11 - s.a22) / 2.0;
  const double disc = std::sqrt(half_diff * half_diff + s.a12 * s.a12);
  const double l1 = tr / 2.0 + disc;
  const double l2 = tr / 2.0 - disc;
  if (l2 >= 0.0) return s;
  // eigenvector for l1
  double vx;
  double vy;
  if (std::abs(s.a12) > 0.0) {
    vx = l1 - s.a22;
    vy = s.a12;
  } else {
    vx = s.a11 >= s.a22 ? 1.0 : 0.0;
    vy = s.a11 >= s.a22 ? 0.0 : 1.0;
  }
  const double norm = std::sqrt(vx * vx + vy * vy);
  vx /= norm;
  vy /= norm;
  const double keep = std::max(l1, 0.0);
  return {keep * vx * vx, keep * vx * vy, keep * vy * vy};
}

// Empirical (1-alpha) quantile of the supremum functional over simulated
// Brownian paths on a uniform n_grid over [eta/(1+eta), L/(1+L)]. Paths get
// per-index seeds, so the result is thread-count invariant.
inline double brownian_sup_critical(const Sym2& m_mat, double gamma, double L,
                                    double eta, double alpha,
                                    std::size_t n_paths, std::size_t n_grid,
                                    std::uint64_t seed,
                                    std::size_t threads = 1) {
  if (!(gamma >= 0.0 && gamma < 0.5)) {
    throw std::invalid_argument("brownian_sup_critical: gamma in [0, 0.5)");
  }
  if (gamma > 0.0 && !(eta > 0.0)) {
    throw std::invalid_argument(
        "brownian_sup_critical: gamma > 0 needs eta > 0, the boundary "
        "functional is not integrable at the origin");
  }
  if (!(eta >= 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("brownian_sup_critical: need eta >= 0, L > 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("brownian_sup_critical: alpha in (0, 1)");
  }
  if (n_paths < 2 || n_grid < 2) {
    throw std::invalid_argument("brownian_sup_critical: grid too small");
  }

  const double s_lo = eta / (1.0 + eta);
  const double s_hi = L / (1.0 + L);
  if (!(s_hi > s_lo)) {
    throw std::invalid_argument("brownian_sup_critical: empty s-interval");
  }
  const double ds = (s_hi - s_lo) / static_cast<double>(n_grid - 1);
  const double sqrt_ds = std::sqrt(ds);
  const double sqrt_s0 = std::sqrt(s_lo);

  std::vector<double> inv_weight(n_grid, 1.0);
  if (gamma > 0.0) {
    for (std::size_t i = 0; i < n_grid; ++i) {
      const double s = s_lo + ds * static_cast<double>(i);
      inv_weight[i] = std::pow(s, -2.0 * gamma);
    }
  }

  std::vector<double> sups(n_paths, 0.0);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    Rng rng(subseed(seed, p));
    double b1 = sqrt_s0 * rng.normal();
    double b2 = sqrt_s0 * rng.normal();
    double best = (m_mat.a11 * b1 * b1 + 2.0 * m_mat.a12 * b1 * b2 +
                   m_mat.a22 * b2 * b2) *
                  inv_weight[0];
    for (std::size_t i = 1; i < n_grid; ++i) {
      b1 += sqrt_ds * rng.normal();
      b2 += sqrt_ds * rng.normal();
      const double q = (m_mat.a11 * b1 * b1 + 2.0 * m_mat.a12 * b1 * b2 +
                        m_mat.a22 * b2 * b2) *
                       inv_weight[i];
      if (q > best) best = q;
    }
    sups[p] = best;
  });

  std::sort(sups.begin(), sups.end());
  const std::size_t idx = floor_order_index(n_paths, 1.0 - alpha);
  return sups[idx - 1];
}

struct AsymptoticConfig {
  std::size_t n_u = 400;       // Monte Carlo draws for the weighted integral
  std::size_t n_paths = 10000;  // Brownian paths
  std::size_t n_grid = 2048;    // time grid per path
  std::size_t h_T = 0;          // 0: ceil(T^(1/3))
  double eta = -1.0;            // <0: 0.05 when gamma > 0, else 0
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

// Full simulated-asymptotics threshold for a training sample.
inline double asymptotic_critical_value(std::span<const double> training,
                                        const MonitorConfig& config,
                                        const AsymptoticConfig& asym) {
  config.validate();
  if (config.kernel.family != KernelFamily::Gaussian) {
    throw std::invalid_argument(
        "asymptotic route: implemented for the gaussian weight");
  }
  std::size_t h_T = asym.h_T;
  if (h_T == 0) {
    h_T = static_cast<std::size_t>(
        std::ceil(std::cbrt(static_cast<double>(training.size())) - 1e-9));
  }
  double eta = asym.eta;
  if (eta < 0.0) eta = config.gamma > 0.0 ? 0.05 : 0.0;

  Rng rng(subseed(asym.seed, 0x5eedu));
  const WeightedCov wc =
      integrate_sigma_w(training, config.kernel, asym.n_u, h_T, rng);
  const Sym2 m_psd = project_psd(wc.m);
  return brownian_sup_critical(m_psd, config.gamma, config.L, eta,
                               config.alpha, asym.n_paths, asym.n_grid,
                               asym.seed, asym.threads);
}

}  // namespace ecfmon
