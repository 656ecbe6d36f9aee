#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// Reference computations written independently of the library code.
namespace oracle {

inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse normal CDF by bisection on std::erfc.
inline double phi_inv(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Hazen ECDF straight from the definition: positions (i - 0.5)/n joined
// linearly, ties take the midpoint of their positions, clamped outside.
inline double hazen_cdf(std::vector<double> v, double x) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  if (x < v.front()) return 0.5 / n;
  if (x > v.back()) return 1.0 - 0.5 / n;
  std::size_t eq_lo = v.size();
  std::size_t eq_hi = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == x) {
      eq_lo = std::min(eq_lo, i);
      eq_hi = std::max(eq_hi, i);
    }
  }
  if (eq_lo <= eq_hi) return 0.5 * ((eq_lo + 0.5) + (eq_hi + 0.5)) / n;
  std::size_t i = 0;
  while (v[i + 1] < x) ++i;
  const double f = (x - v[i]) / (v[i + 1] - v[i]);
  return ((i + 0.5) + f) / n;
}

inline double mean(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

}  // namespace oracle
