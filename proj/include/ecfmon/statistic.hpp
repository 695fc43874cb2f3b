#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecfmon/kernel.hpp"
#include "ecfmon/numeric.hpp"
#include "ecfmon/series.hpp"

namespace ecfmon {

// L2 distance between empirical characteristic functions of delay-embedded
// segments, in the closed pairwise form
//
//   D = S_AA / |A|^2 + S_BB / |B|^2 - 2 S_AB / (|A| |B|)
//
// where S_XY sums the signed pair weight g(Y_j - Y_k) over embedding sets X
// and Y. The variants differ only in which embeddings enter A and B:
//
//   Cumulative  A = training embeddings, B = all embeddings up to T + t
//   PostBreak   A = training embeddings, B = the t embeddings ending after T
//   NegEnergy   Cumulative ranges with the energy family's 1-cos kernel,
//               returned negated once so that large positive values signal a
//               break for every variant
//
// All variants use the m-adjusted embedding counts (|A| = T - m + 1). For the
// energy family the signed weight already carries the negation, so NegEnergy
// and Cumulative share one code path; the documented sign convention is
// checked in the tests against the raw 1-cos form.

enum class StatVariant { Cumulative, PostBreak, NegEnergy };

namespace detail {

struct IndexRange {
  std::size_t lo;
  std::size_t hi;  // exclusive
  std::size_t count() const { return hi - lo; }
};

// Sum of g(Y_j - Y_k) over j in ra, k in rb (full rectangle, both orders
// counted when ranges overlap, matching the double sums in the definition).
inline double rect_sum(const PairKernel& g, const std::vector<double>& emb,
                       IndexRange ra, IndexRange rb) {
  const std::size_t m = g.m();
  KahanSum total;
  for (std::size_t j = ra.lo; j < ra.hi; ++j) {
    const double* xj = emb.data() + j * m;
    KahanSum row;
    for (std::size_t k = rb.lo; k < rb.hi; ++k) {
      row.add(g(xj, emb.data() + k * m));
    }
    total.add(row.value());
  }
  return total.value();
}

inline double combine(double s_aa, double s_bb, double s_ab, std::size_t na,
                      std::size_t nb) {
  const double ca = static_cast<double>(na);
  const double cb = static_cast<double>(nb);
  return s_aa / (ca * ca) + s_bb / (cb * cb) - 2.0 * s_ab / (ca * cb);
}

}  // namespace detail

// Batch evaluation of the distance after t monitoring observations. Uses
// series values 1..T+t; the series may hold more. t = 0 is the degenerate
// identical-segment case for the cumulative variants and is exactly zero.
inline double d_batch(const Series& s, const KernelSpec& kernel, std::size_t t,
                      StatVariant variant = StatVariant::Cumulative) {
  kernel.validate();
  const std::size_t T = s.train_len();
  const std::size_t m = kernel.m;
  if (m > T) {
    throw std::invalid_argument("d_batch: m exceeds the training length");
  }
  if (T + t > s.size()) {
    throw std::invalid_argument("d_batch: series holds fewer than T+t values");
  }
  if (variant == StatVariant::PostBreak && t < 1) {
    throw std::invalid_argument("d_batch: post-break variant needs t >= 1");
  }
  if (t == 0) return 0.0;

  const PairKernel g(kernel);
  const std::vector<double> emb =
      embed(std::span<const double>(s.values().data(), T + t), m);
  const std::size_t n_train = T - m + 1;

  const detail::IndexRange a{0, n_train};
  const detail::IndexRange b = variant == StatVariant::PostBreak
                                   ? detail::IndexRange{n_train, n_train + t}
                                   : detail::IndexRange{0, n_train + t};

  const double s_aa = detail::rect_sum(g, emb, a, a);
  const double s_bb = detail::rect_sum(g, emb, b, b);
  const double s_ab = detail::rect_sum(g, emb, a, b);
  return detail::combine(s_aa, s_bb, s_ab, a.count(), b.count());
}

// Streaming form of the same quantity. Holds the running double sums; each
// new observation costs one kernel row against everything seen so far
// (O(T + t) evaluations). The batch and streaming routes must agree to
// ~1e-10 relative at every step; the tests enforce that.
class EcfAccumulator {
 public:
  EcfAccumulator(std::span<const double> training, const KernelSpec& kernel)
      : g_(kernel) {
    const std::size_t m = g_.m();
    if (training.size() < m) {
      throw std::invalid_argument(
          "accumulator: training shorter than the embedding dimension");
    }
    train_len_ = training.size();
    emb_ = embed(training, m);
    n_train_ = train_len_ - m + 1;

    // S_tt once, by rows; the row sums double as the initial cross rows
    for (std::size_t j = 0; j < n_train_; ++j) {
      KahanSum row;
      const double* xj = emb_.data() + j * m;
      for (std::size_t k = 0; k < n_train_; ++k) {
        row.add(g_(xj, emb_.data() + k * m));
      }
      s_tt_.add(row.value());
    }
    s_full_ = s_tt_;
    s_cross_ = s_tt_;

    if (m > 1) {
      lag_.assign(training.end() - (m - 1), training.end());
    }
  }

  std::size_t t() const { return t_; }
  std::size_t train_len() const { return train_len_; }

  // Appends one monitoring observation.
  void push(double x) {
    const std::size_t m = g_.m();
    std::vector<double> row(m);
    for (std::size_t j = 0; j + 1 < m; ++j) row[j] = lag_[j];
    row[m - 1] = x;

    const std::size_t n_all = n_train_ + t_;
    KahanSum train_part;
    for (std::size_t k = 0; k < n_train_; ++k) {
      train_part.add(g_(row.data(), emb_.data() + k * m));
    }
    KahanSum mon_part;
    for (std::size_t k = n_train_; k < n_all; ++k) {
      mon_part.add(g_(row.data(), emb_.data() + k * m));
    }

    const double w0 = g_.at_zero();
    s_full_.add(2.0 * (train_part.value() + mon_part.value()) + w0);
    s_cross_.add(train_part.value());
    s_post_.add(2.0 * mon_part.value() + w0);
    s_cross_post_.add(train_part.value());
    cross_row_sums_.push_back(train_part.value());

    emb_.insert(emb_.end(), row.begin(), row.end());
    if (m > 1) {
      lag_.erase(lag_.begin());
      lag_.push_back(x);
    }
    ++t_;
  }

  double current_d(StatVariant variant = StatVariant::Cumulative) const {
    if (t_ == 0) return 0.0;
    if (variant == StatVariant::PostBreak) {
      return detail::combine(s_tt_.value(), s_post_.value(),
                             s_cross_post_.value(), n_train_, t_);
    }
    return detail::combine(s_tt_.value(), s_full_.value(), s_cross_.value(),
                           n_train_, n_train_ + t_);
  }

  // running sums, exposed for the equality and boundedness checks
  double s_tt() const { return s_tt_.value(); }
  double s_full() const { return s_full_.value(); }
  double s_cross() const { return s_cross_.value(); }
  const std::vector<double>& cross_row_sums() const { return cross_row_sums_; }
  const KernelSpec& kernel() const { return g_.spec(); }

 private:
  PairKernel g_;
  std::size_t train_len_ = 0;
  std::size_t n_train_ = 0;
  std::size_t t_ = 0;
  std::vector<double> emb_;   // all embeddings so far, flat rows
  std::vector<double> lag_;   // last m-1 raw observations
  std::vector<double> cross_row_sums_;
  KahanSum s_tt_;
  KahanSum s_full_;
  KahanSum s_cross_;
  KahanSum s_post_;
  KahanSum s_cross_post_;
};

}  // namespace ecfmon
