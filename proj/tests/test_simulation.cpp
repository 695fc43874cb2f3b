#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecfmon/simulation.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace ecfmon;

namespace {

double mean_of(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i];
  return s / static_cast<double>(hi - lo);
}

double var_of(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  const double mu = mean_of(x, lo, hi);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += (x[i] - mu) * (x[i] - mu);
  return s / static_cast<double>(hi - lo);
}

DgpPath make(Dgp name, std::size_t T, double L, std::uint64_t seed,
             std::size_t burn = 500) {
  DgpSpec spec;
  spec.name = name;
  spec.T = T;
  spec.L = L;
  spec.burn_in = burn;
  Rng rng(seed);
  return dgp_generate(spec, rng);
}

}  // namespace

TEST_CASE("process names round-trip") {
  for (const auto d : {Dgp::S1, Dgp::S2, Dgp::S3, Dgp::S4, Dgp::S5, Dgp::S6,
                       Dgp::S7, Dgp::P1, Dgp::P2, Dgp::P3, Dgp::P4, Dgp::P5}) {
    REQUIRE(dgp_from_string(dgp_name(d)) == d);
  }
  REQUIRE_THROWS_AS(dgp_from_string("S9"), std::invalid_argument);
}

TEST_CASE("paths are deterministic and sized T plus horizon") {
  const auto a = make(Dgp::S4, 120, 1.5, 42);
  const auto b = make(Dgp::S4, 120, 1.5, 42);
  REQUIRE(a.x == b.x);
  REQUIRE(a.x.size() == 120 + 180);
  REQUIRE(a.train_len == 120);

  const auto p = make(Dgp::P5, 80, 1.0, 9);
  const auto q = make(Dgp::P5, 80, 1.0, 9);
  REQUIRE(p.x == q.x);
  REQUIRE(p.v_break == q.v_break);
}

TEST_CASE("spin-up only affects the recursive processes") {
  const auto p0 = make(Dgp::P1, 200, 1.0, 5, 0);
  const auto p5 = make(Dgp::P1, 200, 1.0, 5, 500);
  REQUIRE(p0.x == p5.x);

  const auto s0 = make(Dgp::S2, 200, 1.0, 5, 0);
  const auto s5 = make(Dgp::S2, 200, 1.0, 5, 500);
  REQUIRE(s0.x != s5.x);
}

TEST_CASE("stationary processes have the right second moments") {
  const std::size_t T = 50000;

  const auto s1 = make(Dgp::S1, T, 1.0, 101);
  REQUIRE_THAT(mean_of(s1.x, 0, s1.x.size()), WithinAbs(0.0, 0.015));
  REQUIRE_THAT(var_of(s1.x, 0, s1.x.size()), WithinAbs(1.0, 0.02));

  const auto s2 = make(Dgp::S2, T, 1.0, 102);
  REQUIRE_THAT(var_of(s2.x, 0, s2.x.size()), WithinAbs(4.0 / 3.0, 0.03));
  double lag1 = 0.0;
  const double mu = mean_of(s2.x, 0, s2.x.size());
  for (std::size_t i = 0; i + 1 < s2.x.size(); ++i) {
    lag1 += (s2.x[i] - mu) * (s2.x[i + 1] - mu);
  }
  lag1 /= static_cast<double>(s2.x.size() - 1) * var_of(s2.x, 0, s2.x.size());
  REQUIRE_THAT(lag1, WithinAbs(0.5, 0.02));

  const auto s3 = make(Dgp::S3, T, 1.0, 103);
  REQUIRE_THAT(var_of(s3.x, 0, s3.x.size()), WithinAbs(2.0 / 7.0, 0.02));

  const auto s4 = make(Dgp::S4, T, 1.0, 104);
  REQUIRE_THAT(var_of(s4.x, 0, s4.x.size()), WithinAbs(0.25, 0.02));

  const auto s6 = make(Dgp::S6, T, 1.0, 106);
  const double v6 = var_of(s6.x, 0, s6.x.size());
  REQUIRE(v6 > 0.95);
  REQUIRE(v6 < 1.1);
}

TEST_CASE("cauchy noise has unit quartiles") {
  auto p = make(Dgp::S7, 50000, 1.0, 107);
  std::sort(p.x.begin(), p.x.end());
  const std::size_t n = p.x.size();
  REQUIRE_THAT(p.x[n / 2], WithinAbs(0.0, 0.03));
  REQUIRE_THAT(p.x[n / 4], WithinAbs(-1.0, 0.05));
  REQUIRE_THAT(p.x[3 * n / 4], WithinAbs(1.0, 0.05));
}

TEST_CASE("break points land inside the monitoring window") {
  for (const auto d : {Dgp::P1, Dgp::P2, Dgp::P3, Dgp::P5}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto p = make(d, 100, 1.5, seed);
      REQUIRE(p.v_break >= 100.0);
      REQUIRE(p.v_break < 100.0 * (1.0 + 0.8 * 1.5) + 1e-9);
    }
  }
  REQUIRE(make(Dgp::S3, 100, 1.0, 1).v_break == 0.0);
  REQUIRE(make(Dgp::P4, 100, 1.0, 1).v_break == 0.0);
}

TEST_CASE("post-break segments change the way they should") {
  const std::size_t T = 20000;

  const auto p1 = make(Dgp::P1, T, 1.0, 201);
  const auto b1 = static_cast<std::size_t>(std::ceil(p1.v_break));
  REQUIRE_THAT(mean_of(p1.x, b1, p1.x.size()), WithinAbs(1.0, 0.06));
  REQUIRE_THAT(mean_of(p1.x, 0, T), WithinAbs(0.0, 0.03));

  const auto p2 = make(Dgp::P2, T, 1.0, 202);
  const auto b2 = static_cast<std::size_t>(std::ceil(p2.v_break));
  REQUIRE_THAT(var_of(p2.x, b2, p2.x.size()), WithinAbs(4.0, 0.6));
  REQUIRE_THAT(var_of(p2.x, 0, T), WithinAbs(1.0, 0.05));

  // same mean and variance on both sides of the break, different skewness
  const auto p3 = make(Dgp::P3, T, 1.0, 203);
  const auto b3 = static_cast<std::size_t>(std::ceil(p3.v_break));
  REQUIRE_THAT(mean_of(p3.x, 0, T), WithinAbs(1.0, 0.05));
  REQUIRE_THAT(mean_of(p3.x, b3, p3.x.size()), WithinAbs(1.0, 0.08));
  REQUIRE_THAT(var_of(p3.x, 0, T), WithinAbs(2.0, 0.12));
  REQUIRE_THAT(var_of(p3.x, b3, p3.x.size()), WithinAbs(2.0, 0.3));
  const auto third = [&](std::size_t lo, std::size_t hi) {
    const double mu = mean_of(p3.x, lo, hi);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = p3.x[i] - mu;
      s += d * d * d;
    }
    return s / static_cast<double>(hi - lo);
  };
  REQUIRE(std::abs(third(0, T)) < 1.0);
  REQUIRE(third(b3, p3.x.size()) > 3.0);

  // variance decays smoothly over the monitoring period
  const auto p4 = make(Dgp::P4, 5000, 1.0, 204);
  const double sd_first = std::sqrt(var_of(p4.x, 5000, 6000));
  const double sd_last = std::sqrt(var_of(p4.x, 9000, 10000));
  REQUIRE(sd_first > 1.5 * sd_last);
  REQUIRE_THAT(std::sqrt(var_of(p4.x, 0, 5000)), WithinAbs(1.0, 0.05));

  // the stable tail is heavy, the normal segment is not
  const auto p5 = make(Dgp::P5, T, 1.0, 205);
  const auto b5 = static_cast<std::size_t>(std::ceil(p5.v_break));
  std::size_t big_pre = 0;
  std::size_t big_post = 0;
  for (std::size_t i = 0; i < T; ++i) {
    if (std::abs(p5.x[i]) > 10.0) ++big_pre;
  }
  for (std::size_t i = b5; i < p5.x.size(); ++i) {
    if (std::abs(p5.x[i]) > 10.0) ++big_post;
  }
  REQUIRE(big_pre == 0);
  REQUIRE(big_post > 20);
}

TEST_CASE("skewed stable draws match their characteristic function") {
  // CF at argument v: exp(-|v|) * (cos(g), -sin(g)), g = 0.25 (2/pi) v ln|v|
  Rng rng(606);
  const std::size_t n = 300000;
  double c7 = 0.0, s7 = 0.0, c13 = 0.0, s13 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.stable1(0.25);
    c7 += std::cos(0.7 * x);
    s7 += std::sin(0.7 * x);
    c13 += std::cos(1.3 * x);
    s13 += std::sin(1.3 * x);
    c1 += std::cos(rng.cauchy());
  }
  const double dn = static_cast<double>(n);
  REQUIRE_THAT(c7 / dn, WithinAbs(0.4961933018056453, 0.01));
  REQUIRE_THAT(s7 / dn, WithinAbs(0.019727422153395596, 0.01));
  REQUIRE_THAT(c13 / dn, WithinAbs(0.27213035653076056, 0.01));
  REQUIRE_THAT(s13 / dn, WithinAbs(-0.014786726100628854, 0.01));
  // standard cauchy: E cos(X) = e^{-1}
  REQUIRE_THAT(c1 / dn, WithinAbs(0.36787944117144233, 0.01));
}

TEST_CASE("warp-speed run uses the pooled quantile rule") {
  DgpSpec spec;
  spec.name = Dgp::S1;
  spec.T = 30;
  spec.L = 1.0;
  MonitorConfig cfg;
  cfg.L = 1.0;

  const auto res = warp_speed_mc(spec, cfg, 50, 777, 1);
  REQUIRE(res.reps == 50);
  REQUIRE(res.observed_max.size() == 50);
  REQUIRE(res.replicate_max.size() == 50);

  auto sorted = res.replicate_max;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(res.c_star == sorted[ceil_order_index(50, 0.95) - 1]);
  std::size_t rej = 0;
  for (const double mx : res.observed_max) {
    if (mx > res.c_star) ++rej;
  }
  REQUIRE(res.rejections == rej);
  REQUIRE(res.rate == static_cast<double>(rej) / 50.0);
}

TEST_CASE("warp-speed results do not depend on the thread count") {
  DgpSpec spec;
  spec.name = Dgp::S2;
  spec.T = 40;
  spec.L = 0.5;
  MonitorConfig cfg;
  cfg.L = 0.5;

  const auto r1 = warp_speed_mc(spec, cfg, 24, 31, 1);
  const auto r3 = warp_speed_mc(spec, cfg, 24, 31, 3);
  REQUIRE(r1.observed_max == r3.observed_max);
  REQUIRE(r1.replicate_max == r3.replicate_max);
  REQUIRE(r1.c_star == r3.c_star);
}

TEST_CASE("warp-speed validates its inputs") {
  DgpSpec spec;
  spec.T = 30;
  spec.L = 1.0;
  MonitorConfig cfg;
  cfg.L = 0.5;  // horizon mismatch
  REQUIRE_THROWS_AS(warp_speed_mc(spec, cfg, 10, 1, 1), std::invalid_argument);
  cfg.L = 1.0;
  REQUIRE_THROWS_AS(warp_speed_mc(spec, cfg, 1, 1, 1), std::invalid_argument);
}
