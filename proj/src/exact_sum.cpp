#include "alignpxtr/exact_sum.hpp"

#include <cmath>
#include <cstddef>

namespace alignpxtr {

void ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::merge(const ExactSum& other) {
  for (double p : other.partials_) add(p);
}

double ExactSum::value() const {
  // Correctly rounded total of the non-overlapping partials, including the
  // half-way case where the remaining partials break the tie.
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

ExactSum ExactSum::from_partials(std::span<const double> partials) {
  ExactSum s;
  // Keep a stored representation as-is so a reload is bit-identical; anything
  // not strictly increasing in magnitude is renormalised.
  bool ordered = true;
  for (std::size_t i = 0; i < partials.size(); ++i) {
    if (!std::isfinite(partials[i]) || partials[i] == 0.0 ||
        (i > 0 && !(std::fabs(partials[i - 1]) < std::fabs(partials[i])))) {
      ordered = false;
      break;
    }
  }
  if (ordered) {
    s.partials_.assign(partials.begin(), partials.end());
    return s;
  }
  for (double p : partials) s.add(p);
  return s;
}

}  // namespace alignpxtr
