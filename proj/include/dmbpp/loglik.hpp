#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dmbpp {

/// Per-draw, per-observation log-likelihoods ℓ_{t,i}; rows are retained
/// draws, columns observations.
class LogLikMatrix {
 public:
  LogLikMatrix() = default;
  LogLikMatrix(std::size_t draws, std::size_t observations)
      : rows_(draws), cols_(observations), values_(draws * observations, 0.0) {}
  LogLikMatrix(std::size_t draws, std::size_t observations, std::vector<double> values);

  std::size_t draws() const { return rows_; }
  std::size_t observations() const { return cols_; }
  double operator()(std::size_t t, std::size_t i) const { return values_[t * cols_ + i]; }
  double& operator()(std::size_t t, std::size_t i) { return values_[t * cols_ + i]; }
  std::span<const double> row(std::size_t t) const { return {values_.data() + t * cols_, cols_}; }
  std::span<double> row(std::size_t t) { return {values_.data() + t * cols_, cols_}; }

  /// Appends a draw; the first call fixes the number of observations.
  void push_back(std::span<const double> draw);

  friend bool operator==(const LogLikMatrix&, const LogLikMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace dmbpp
