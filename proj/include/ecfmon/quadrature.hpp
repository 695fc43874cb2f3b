#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecfmon/statistic.hpp"

namespace ecfmon {

// Gauss-Hermite nodes and weights for the physicists' weight exp(-x^2),
// by Newton iteration on the orthonormal Hermite recurrence with the
// classical asymptotic starting guesses. sum(w) = sqrt(pi).
inline void gauss_hermite(std::size_t n, std::vector<double>& x,
                          std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  constexpr double kPim4 = 0.7511255444649425;  // pi^(-1/4)
  constexpr double kEps = 1e-14;
  x.assign(n, 0.0);
  w.assign(n, 0.0);

  const std::size_t half = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }

    double pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      double p1 = kPim4;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double dj = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / dj) * p2 - std::sqrt((dj - 1.0) / dj) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw std::runtime_error("gauss_hermite: Newton iteration stalled");
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Direct numerical evaluation of the ECF L2 distance
//
//   integral over R^m of |psi_A(u) - psi_B(u)|^2 scale exp(-a ||u||^2) du
//
// with the characteristic functions built pointwise on a Gauss-Hermite grid
// rescaled by 1/sqrt(a) (tensor product for m = 2). This is the reference
// route for the closed-form d_batch; it shares only the embedding with it.
// Gaussian weight only, m <= 2.
inline double d_quadrature_oracle(const Series& s, const KernelSpec& kernel,
                                  std::size_t t,
                                  StatVariant variant = StatVariant::Cumulative,
                                  std::size_t nodes = 0) {
  kernel.validate();
  if (kernel.family != KernelFamily::Gaussian) {
    throw std::invalid_argument(
        "d_quadrature_oracle: only the gaussian weight is integrable on a "
        "Hermite grid");
  }
  const std::size_t m = kernel.m;
  if (m > 2) {
    throw std::domain_error("d_quadrature_oracle: m > 2 is not supported");
  }
  const std::size_t T = s.train_len();
  if (m > T) {
    throw std::invalid_argument("d_quadrature_oracle: m exceeds training");
  }
  if (T + t > s.size()) {
    throw std::invalid_argument(
        "d_quadrature_oracle: series holds fewer than T+t values");
  }
  if (variant == StatVariant::PostBreak && t < 1) {
    throw std::invalid_argument(
        "d_quadrature_oracle: post-break variant needs t >= 1");
  }
  if (t == 0) return 0.0;

  if (nodes == 0) nodes = m == 1 ? 160 : 72;
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_hermite(nodes, gx, gw);

  const std::vector<double> emb =
      embed(std::span<const double>(s.values().data(), T + t), m);
  const std::size_t n_train = T - m + 1;
  const std::size_t a_lo = 0;
  const std::size_t a_hi = n_train;
  const std::size_t b_lo = variant == StatVariant::PostBreak ? n_train : 0;
  const std::size_t b_hi = n_train + t;
  const double ca = static_cast<double>(a_hi - a_lo);
  const double cb = static_cast<double>(b_hi - b_lo);

  const double root_a = std::sqrt(kernel.a);

  // |psi_A(u) - psi_B(u)|^2 at one grid point
  const auto integrand = [&](const double* u) {
    double re_a = 0.0, im_a = 0.0, re_b = 0.0, im_b = 0.0;
    for (std::size_t j = b_lo; j < b_hi; ++j) {
      const double* y = emb.data() + j * m;
      double ang = 0.0;
      for (std::size_t d = 0; d < m; ++d) ang += u[d] * y[d];
      const double c = std::cos(ang);
      const double si = std::sin(ang);
      re_b += c;
      im_b += si;
      if (j >= a_lo && j < a_hi) {
        re_a += c;
        im_a += si;
      }
    }
    if (b_lo > a_lo) {  // disjoint post-break ranges: A not covered above
      re_a = im_a = 0.0;
      for (std::size_t j = a_lo; j < a_hi; ++j) {
        const double* y = emb.data() + j * m;
        double ang = 0.0;
        for (std::size_t d = 0; d < m; ++d) ang += u[d] * y[d];
        re_a += std::cos(ang);
        im_a += std::sin(ang);
      }
    }
    const double dre = re_a / ca - re_b / cb;
    const double dim = im_a / ca - im_b / cb;
    return dre * dre + dim * dim;
  };

  double total = 0.0;
  if (m == 1) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const double u = gx[i] / root_a;
      total += gw[i] * integrand(&u);
    }
    total /= root_a;
  } else {
    for (std::size_t i = 0; i < nodes; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < nodes; ++j) {
        const double u[2] = {gx[i] / root_a, gx[j] / root_a};
        row += gw[j] * integrand(u);
      }
      total += gw[i] * row;
    }
    total /= kernel.a;
  }
  return total * kernel.weight_scale;
}

}  // namespace ecfmon
