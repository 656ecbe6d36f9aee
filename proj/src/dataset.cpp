#include "alignpxtr/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace alignpxtr {

void Dataset::add(std::span<const double> features, double target) {
  if (features.size() != dimension_) {
    throw std::invalid_argument("Dataset: expected " + std::to_string(dimension_) +
                                " features, got " + std::to_string(features.size()));
  }
  for (double f : features) {
    if (!std::isfinite(f)) throw std::invalid_argument("Dataset: non-finite feature");
  }
  if (!std::isfinite(target)) throw std::invalid_argument("Dataset: non-finite target");
  features_.insert(features_.end(), features.begin(), features.end());
  targets_.push_back(target);
}

}  // namespace alignpxtr
