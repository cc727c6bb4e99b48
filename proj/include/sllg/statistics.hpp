#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

namespace sllg {

/// Mergeable count / sum / sum of squares.
struct Moments {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }

  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }

  double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

  /// Unbiased sample variance.
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }

  double stderr_of_mean() const { return n == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n)); }
};

inline Moments moments_of(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.add(x);
  return m;
}

}  // namespace sllg
