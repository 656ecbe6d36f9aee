#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace alignpxtr {

/// Dense row-major feature matrix paired with one target per row.
class Dataset {
 public:
  explicit Dataset(std::size_t dimension) : dimension_(dimension) {}

  /// Throws std::invalid_argument on a dimension mismatch or non-finite entry.
  void add(std::span<const double> features, double target);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * dimension_, dimension_};
  }
  double target(std::size_t i) const { return targets_[i]; }
  std::span<const double> targets() const { return targets_; }

 private:
  std::size_t dimension_;
  std::vector<double> features_;
  std::vector<double> targets_;
};

}  // namespace alignpxtr
