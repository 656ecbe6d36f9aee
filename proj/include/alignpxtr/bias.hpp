#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace alignpxtr {

struct Categorical {
  std::size_t cardinality = 1;
  bool operator==(const Categorical&) const = default;
};

/// k strictly increasing boundaries split the real line into k+1 buckets;
/// bucket i is [boundaries[i-1], boundaries[i]) with open-ended first/last.
struct Continuous {
  std::vector<double> boundaries;
  bool operator==(const Continuous&) const = default;
};

struct BiasDimension {
  std::string name;
  std::variant<Categorical, Continuous> kind;

  std::size_t bucket_count() const;
  bool is_categorical() const { return std::holds_alternative<Categorical>(kind); }
  bool operator==(const BiasDimension&) const = default;
};

/// Discretized bucket coordinates of one record, one index per dimension.
struct BiasKey {
  std::vector<std::size_t> indices;

  auto operator<=>(const BiasKey&) const = default;
  bool operator==(const BiasKey&) const = default;

  /// Comma-separated indices, e.g. "2,0".
  std::string to_string() const;
  static BiasKey parse(std::string_view text);
};

/// Ordered declaration of the bias dimensions.
class BiasSpec {
 public:
  BiasSpec() = default;
  explicit BiasSpec(std::vector<BiasDimension> dimensions);

  const std::vector<BiasDimension>& dimensions() const { return dimensions_; }
  std::size_t dimension_count() const { return dimensions_.size(); }
  std::size_t bucket_combinations() const { return combinations_; }

  /// Throws std::invalid_argument unless `key` addresses a bucket of this spec.
  void validate_key(const BiasKey& key) const;
  std::size_t flat_index(const BiasKey& key) const;
  BiasKey key_at(std::size_t flat) const;
  std::vector<BiasKey> all_keys() const;

  /// Value range of a continuous bucket. Open-ended buckets are given the
  /// width of their neighbour (or 1 when there is a single boundary).
  std::pair<double, double> bucket_interval(std::size_t dim, std::size_t index) const;

  /// Regression encoding of a key: one-hot per categorical dimension and
  /// the bucket midpoint for continuous dimensions.
  std::vector<double> encode(const BiasKey& key) const;
  std::size_t encoded_size() const;

  bool operator==(const BiasSpec& other) const { return dimensions_ == other.dimensions_; }

 private:
  std::vector<BiasDimension> dimensions_;
  std::size_t combinations_ = 0;
};

/// Maps raw bias readings to bucket coordinates. Categorical readings must be
/// integer codes in range; continuous readings must be finite.
BiasKey discretize(std::span<const double> readings, const BiasSpec& spec);

}  // namespace alignpxtr
