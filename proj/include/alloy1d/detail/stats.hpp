#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace alloy1d::detail {

/// Pairwise (cascade) summation: the canonical reduction order for means.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct MeanAndError {
  double mean = 0.0;
  /// Sample standard deviation over sqrt(n); zero for n < 2.
  double std_error = 0.0;
};

inline MeanAndError mean_and_error(std::span<const double> x) {
  MeanAndError r;
  if (x.empty()) return r;
  const double n = static_cast<double>(x.size());
  r.mean = pairwise_sum(x) / n;
  if (x.size() < 2) return r;
  double ss = 0.0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

}  // namespace alloy1d::detail
