#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ecfmon {

// splitmix64 finalizer, used to hash seeds and replicate indices into
// independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed for substream `index` of a master seed. Replicate b of a calibration
// or repetition r of a Monte Carlo run always uses subseed(master, b), so
// results do not depend on how work is split across threads.
inline std::uint64_t subseed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 0x632BE59BD9B4E019ull));
}

// Random draws on top of mt19937_64. The distribution transforms are written
// out here instead of using <random> distributions because those are
// implementation-defined; fixed-seed runs must reproduce bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_pos() { return 1.0 - uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential() { return -std::log(uniform_pos()); }

  // Standard alpha-stable with alpha = 1, scale 1, location 0:
  // characteristic function exp{-|t| (1 + i beta (2/pi) sgn(t) log|t|)}.
  // Chambers-Mallows-Stuck construction.
  double stable1(double beta) {
    const double half_pi = std::numbers::pi / 2.0;
    const double v = std::numbers::pi * (uniform01() - 0.5);
    const double w = exponential();
    const double bv = half_pi + beta * v;
    return (bv * std::tan(v) -
            beta * std::log(half_pi * w * std::cos(v) / bv)) /
           half_pi;
  }

  double cauchy() { return stable1(0.0); }

  // {0, ..., n-1}, fixed-point multiply (no modulo bias at usable n)
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Geometric on {1, 2, ...} with mean 1/p, via inversion.
  std::uint64_t geometric1(double p) {
    if (p >= 1.0) return 1;
    const double g = std::ceil(std::log(uniform_pos()) / std::log1p(-p));
    return g < 1.0 ? 1 : static_cast<std::uint64_t>(g);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ecfmon
