#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fou::testing {

/// Sample moments with the standard errors used by the Monte Carlo checks.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;       // unbiased
  double mean_se = 0.0;        // sd / sqrt(n)
  double variance_se = 0.0;    // sqrt((m4 - s^4) / n)
  double kurtosis_excess = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.variance = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  m.mean_se = std::sqrt(m.variance / n);
  m.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  m.kurtosis_excess = m4 / (m2 * m2) - 3.0;
  return m;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fou::testing
