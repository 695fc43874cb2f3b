#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ecfmon/rng.hpp"
#include "ecfmon/series.hpp"
#include "ecfmon/statistic.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace ecfmon;

namespace {

// Plain-loop reference: evaluates the three double sums directly from the
// definition, no incremental bookkeeping, no compensated summation.
double d_reference(const std::vector<double>& x, std::size_t train_len,
                   const KernelSpec& kernel, std::size_t t,
                   StatVariant variant) {
  const PairKernel g(kernel);
  const std::size_t m = kernel.m;
  const auto emb = embed({x.data(), train_len + t}, m);
  const std::size_t n_train = train_len - m + 1;
  const std::size_t b_lo = variant == StatVariant::PostBreak ? n_train : 0;
  const std::size_t b_hi = n_train + t;

  double s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
  for (std::size_t j = 0; j < n_train; ++j) {
    for (std::size_t k = 0; k < n_train; ++k) {
      s_aa += g(emb.data() + j * m, emb.data() + k * m);
    }
  }
  for (std::size_t j = b_lo; j < b_hi; ++j) {
    for (std::size_t k = b_lo; k < b_hi; ++k) {
      s_bb += g(emb.data() + j * m, emb.data() + k * m);
    }
  }
  for (std::size_t j = 0; j < n_train; ++j) {
    for (std::size_t k = b_lo; k < b_hi; ++k) {
      s_ab += g(emb.data() + j * m, emb.data() + k * m);
    }
  }
  const double ca = static_cast<double>(n_train);
  const double cb = static_cast<double>(b_hi - b_lo);
  return s_aa / (ca * ca) + s_bb / (cb * cb) - 2.0 * s_ab / (ca * cb);
}

std::vector<double> random_series(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("distance is exactly zero before monitoring starts") {
  const Series s({0.4, -1.2, 0.7, 2.1}, 4);
  KernelSpec k;
  REQUIRE(d_batch(s, k, 0) == 0.0);
  EcfAccumulator acc(s.training(), k);
  REQUIRE(acc.current_d() == 0.0);
}

TEST_CASE("hand-checked one-step case") {
  // training {0}, one new observation 1, m = 1, a = 1:
  // D = (W(0) - W(1)) / 2 with W(0) = sqrt(pi), W(1) = sqrt(pi) e^{-1/4}
  const Series s({0.0, 1.0}, 1);
  KernelSpec k;
  REQUIRE_THAT(d_batch(s, k, 1), WithinRel(0.1960327019311865, 1e-13));

  EcfAccumulator acc(s.training(), k);
  acc.push(1.0);
  REQUIRE_THAT(acc.current_d(), WithinRel(0.1960327019311865, 1e-13));

  // the training double sum over {0, 1}: 2 sqrt(pi) (1 + e^{-1/4})
  EcfAccumulator acc2({s.values().data(), 2}, k);
  REQUIRE_THAT(acc2.s_tt(), WithinRel(6.305684595897318, 1e-13));
}

TEST_CASE("constant series gives a vanishing distance") {
  const std::vector<double> x(11, 3.25);
  for (const auto fam : {KernelFamily::Gaussian, KernelFamily::Energy}) {
    for (const std::size_t m : {std::size_t{1}, std::size_t{2}}) {
      KernelSpec k;
      k.family = fam;
      k.a = fam == KernelFamily::Energy ? 1.0 : 1.0;
      k.m = m;
      const Series s(x, 6);
      REQUIRE_THAT(d_batch(s, k, 5), WithinAbs(0.0, 1e-12));
      REQUIRE_THAT(d_batch(s, k, 5, StatVariant::PostBreak),
                   WithinAbs(0.0, 1e-12));
    }
  }
}

TEST_CASE("batch agrees with the plain-loop reference") {
  Rng rng(91);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t m = 1 + rep % 2;
    const std::size_t n = m + 3 + rep % 20;
    const std::size_t train = m + 1 + rep % (n - m - 1);
    const std::size_t t = n - train;
    const auto x = random_series(rng, n);
    const Series s(x, train);

    KernelSpec k;
    k.m = m;
    k.family = rep % 3 == 0 ? KernelFamily::Energy : KernelFamily::Gaussian;
    k.a = k.family == KernelFamily::Energy ? 0.5 + 0.4 * (rep % 3) : 1.0;

    for (const auto variant :
         {StatVariant::Cumulative, StatVariant::PostBreak}) {
      const double got = d_batch(s, k, t, variant);
      const double ref = d_reference(x, train, k, t, variant);
      REQUIRE_THAT(got, WithinRel(ref, 1e-10));
    }
  }
}

TEST_CASE("streaming accumulator tracks the batch value") {
  Rng rng(7);
  const std::size_t T = 40;
  const std::size_t steps = 30;
  const auto x = random_series(rng, T + steps);

  for (const auto fam : {KernelFamily::Gaussian, KernelFamily::Energy}) {
    KernelSpec k;
    k.family = fam;
    k.m = fam == KernelFamily::Gaussian ? 2 : 1;
    k.a = fam == KernelFamily::Gaussian ? 1.5 : 1.0;

    const Series s(x, T);
    EcfAccumulator acc(s.training(), k);
    for (std::size_t t = 1; t <= steps; ++t) {
      acc.push(x[T + t - 1]);
      const double batch_c = d_batch(s, k, t);
      const double batch_p = d_batch(s, k, t, StatVariant::PostBreak);
      REQUIRE_THAT(acc.current_d(), WithinRel(batch_c, 1e-10));
      REQUIRE_THAT(acc.current_d(StatVariant::PostBreak),
                   WithinRel(batch_p, 1e-10));
    }
  }
}

TEST_CASE("distance is nonnegative for both families") {
  Rng rng(5150);
  for (int rep = 0; rep < 25; ++rep) {
    const auto x = random_series(rng, 24);
    const Series s(x, 12);
    for (const auto fam : {KernelFamily::Gaussian, KernelFamily::Energy}) {
      KernelSpec k;
      k.family = fam;
      k.a = fam == KernelFamily::Energy ? 1.5 : 0.7;
      REQUIRE(d_batch(s, k, 12) >= -1e-12);
      REQUIRE(d_batch(s, k, 12, StatVariant::PostBreak) >= -1e-12);
    }
  }
}

TEST_CASE("negated-energy variant equals the signed cumulative path") {
  Rng rng(333);
  const auto x = random_series(rng, 30);
  const Series s(x, 18);
  KernelSpec k;
  k.family = KernelFamily::Energy;
  k.a = 1.0;

  // one code path: identical, not merely close
  REQUIRE(d_batch(s, k, 12, StatVariant::NegEnergy) ==
          d_batch(s, k, 12, StatVariant::Cumulative));

  // sign contract against the raw ||.||^a double sums
  const PairKernel g(k);
  const auto emb = embed({x.data(), 30}, 1);
  double raw_aa = 0.0, raw_bb = 0.0, raw_ab = 0.0;
  for (std::size_t j = 0; j < 18; ++j) {
    for (std::size_t i = 0; i < 18; ++i) {
      raw_aa += std::abs(x[j] - x[i]);
    }
  }
  for (std::size_t j = 0; j < 30; ++j) {
    for (std::size_t i = 0; i < 30; ++i) {
      raw_bb += std::abs(x[j] - x[i]);
    }
  }
  for (std::size_t j = 0; j < 18; ++j) {
    for (std::size_t i = 0; i < 30; ++i) {
      raw_ab += std::abs(x[j] - x[i]);
    }
  }
  const double raw_combo =
      raw_aa / (18.0 * 18.0) + raw_bb / (30.0 * 30.0) -
      2.0 * raw_ab / (18.0 * 30.0);
  REQUIRE_THAT(d_batch(s, k, 12, StatVariant::NegEnergy),
               WithinRel(-raw_combo, 1e-10));
}

TEST_CASE("distance is shift invariant") {
  Rng rng(2024);
  auto x = random_series(rng, 26);
  const Series s(x, 14);
  for (auto& v : x) v += 3.7;
  const Series shifted(x, 14);

  for (const auto fam : {KernelFamily::Gaussian, KernelFamily::Energy}) {
    KernelSpec k;
    k.family = fam;
    k.m = 2;
    k.a = 1.0;
    REQUIRE_THAT(d_batch(shifted, k, 12), WithinAbs(d_batch(s, k, 12), 1e-9));
  }
}

TEST_CASE("gaussian distance is bounded by four times the weight mass") {
  Rng rng(42);
  auto x = random_series(rng, 20);
  for (auto& v : x) v *= 40.0;  // far-apart clusters cannot exceed the bound
  const Series s(x, 10);
  KernelSpec k;
  k.a = 0.8;
  const PairKernel g(k);
  REQUIRE(d_batch(s, k, 10) <= 4.0 * g.at_zero() + 1e-9);
}

TEST_CASE("statistic input validation") {
  const Series s({1.0, 2.0, 3.0, 4.0}, 2);
  KernelSpec k;
  k.m = 3;
  REQUIRE_THROWS_AS(d_batch(s, k, 1), std::invalid_argument);  // m > T
  k.m = 1;
  REQUIRE_THROWS_AS(d_batch(s, k, 3), std::invalid_argument);  // T+t > n
  REQUIRE_THROWS_AS(d_batch(s, k, 0, StatVariant::PostBreak),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(EcfAccumulator({s.values().data(), 1},
                                   [] {
                                     KernelSpec kk;
                                     kk.m = 2;
                                     return kk;
                                   }()),
                    std::invalid_argument);

  REQUIRE_THROWS_AS(Series({}, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(Series({1.0, 2.0}, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(Series({1.0, std::nan("")}, 1), std::invalid_argument);
}
