#pragma once

#include <span>
#include <vector>

namespace alignpxtr {

/// Exact floating-point accumulator (Shewchuk non-overlapping partials).
///
/// `value()` is the correctly rounded sum of everything added, so it does
/// not depend on insertion order or on how partial sums were merged.
class ExactSum {
 public:
  ExactSum() = default;

  void add(double x);
  void merge(const ExactSum& other);
  double value() const;

  std::span<const double> partials() const { return partials_; }
  static ExactSum from_partials(std::span<const double> partials);

 private:
  std::vector<double> partials_;
};

}  // namespace alignpxtr
