#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace nsfde::stats {

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) {
    const double d = x - m;
    s += d * d;
  }
  return s / static_cast<double>(n - 1);
}

inline double sample_sd(std::span<const double> v) {
  return std::sqrt(sample_variance(v));
}

/// Jackknife standard error of the sample mean: sqrt(((n-1)/n) * sum of
/// squared deviations of the leave-one-out means), which collapses to
/// s / sqrt(n) for the mean statistic.
inline double jackknife_se(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) {
    const double loo = (m * static_cast<double>(n) - x) / static_cast<double>(n - 1);
    const double d = loo - m;
    s += d * d;
  }
  return std::sqrt(s * static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace nsfde::stats
