#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ecfmon {

// A univariate sample split into a training segment (first train_len values,
// assumed stationary) and the monitoring segment that follows it. Values are
// validated once here; every downstream routine may assume finiteness.
class Series {
 public:
  Series(std::vector<double> values, std::size_t train_len)
      : values_(std::move(values)), train_len_(train_len) {
    if (values_.empty()) {
      throw std::invalid_argument("series: no observations");
    }
    if (train_len_ < 1 || train_len_ > values_.size()) {
      throw std::invalid_argument(
          "series: training length must be in [1, n]");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw std::invalid_argument("series: non-finite value at position " +
                                    std::to_string(i + 1));
      }
    }
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::size_t train_len() const { return train_len_; }

  std::span<const double> training() const {
    return {values_.data(), train_len_};
  }
  std::span<const double> monitoring() const {
    return {values_.data() + train_len_, values_.size() - train_len_};
  }

 private:
  std::vector<double> values_;
  std::size_t train_len_;
};

}  // namespace ecfmon
