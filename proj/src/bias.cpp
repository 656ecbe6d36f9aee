#include "alignpxtr/bias.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alignpxtr {

namespace {

constexpr std::size_t kMaxCombinations = std::size_t{1} << 32;

}  // namespace

std::size_t BiasDimension::bucket_count() const {
  if (const auto* c = std::get_if<Categorical>(&kind)) return c->cardinality;
  return std::get<Continuous>(kind).boundaries.size() + 1;
}

std::string BiasKey::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(indices[i]);
  }
  return out;
}

BiasKey BiasKey::parse(std::string_view text) {
  BiasKey key;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto part = text.substr(0, comma);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty()) {
      throw std::invalid_argument("BiasKey: malformed key '" + std::string(text) + "'");
    }
    key.indices.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw std::invalid_argument("BiasKey: trailing comma");
  }
  return key;
}

BiasSpec::BiasSpec(std::vector<BiasDimension> dimensions) : dimensions_(std::move(dimensions)) {
  if (dimensions_.empty()) throw std::invalid_argument("BiasSpec: at least one dimension required");
  combinations_ = 1;
  for (const auto& dim : dimensions_) {
    if (dim.name.empty()) throw std::invalid_argument("BiasSpec: dimension with empty name");
    if (const auto* c = std::get_if<Categorical>(&dim.kind)) {
      if (c->cardinality < 1) {
        throw std::invalid_argument("BiasSpec: dimension '" + dim.name + "' has cardinality 0");
      }
    } else {
      const auto& b = std::get<Continuous>(dim.kind).boundaries;
      if (b.empty()) {
        throw std::invalid_argument("BiasSpec: dimension '" + dim.name + "' has no boundaries");
      }
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!std::isfinite(b[i]) || (i > 0 && !(b[i - 1] < b[i]))) {
          throw std::invalid_argument("BiasSpec: boundaries of '" + dim.name +
                                      "' must be finite and strictly increasing");
        }
      }
    }
    for (const auto& other : dimensions_) {
      if (&other != &dim && other.name == dim.name) {
        throw std::invalid_argument("BiasSpec: duplicate dimension '" + dim.name + "'");
      }
    }
    const std::size_t buckets = dim.bucket_count();
    if (combinations_ > kMaxCombinations / buckets) {
      throw std::invalid_argument("BiasSpec: too many bucket combinations");
    }
    combinations_ *= buckets;
  }
}

void BiasSpec::validate_key(const BiasKey& key) const {
  if (key.indices.size() != dimensions_.size()) {
    throw std::invalid_argument("BiasKey has " + std::to_string(key.indices.size()) +
                                " indices, spec has " + std::to_string(dimensions_.size()) +
                                " dimensions");
  }
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (key.indices[d] >= dimensions_[d].bucket_count()) {
      throw std::invalid_argument("BiasKey index " + std::to_string(key.indices[d]) +
                                  " out of range for dimension '" + dimensions_[d].name + "'");
    }
  }
}

std::size_t BiasSpec::flat_index(const BiasKey& key) const {
  validate_key(key);
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    flat = flat * dimensions_[d].bucket_count() + key.indices[d];
  }
  return flat;
}

BiasKey BiasSpec::key_at(std::size_t flat) const {
  if (flat >= combinations_) throw std::invalid_argument("BiasSpec::key_at: index out of range");
  BiasKey key;
  key.indices.resize(dimensions_.size());
  for (std::size_t d = dimensions_.size(); d > 0; --d) {
    const std::size_t buckets = dimensions_[d - 1].bucket_count();
    key.indices[d - 1] = flat % buckets;
    flat /= buckets;
  }
  return key;
}

std::vector<BiasKey> BiasSpec::all_keys() const {
  std::vector<BiasKey> keys;
  keys.reserve(combinations_);
  for (std::size_t i = 0; i < combinations_; ++i) keys.push_back(key_at(i));
  return keys;
}

std::pair<double, double> BiasSpec::bucket_interval(std::size_t dim, std::size_t index) const {
  const auto* c = std::get_if<Continuous>(&dimensions_.at(dim).kind);
  if (c == nullptr) throw std::invalid_argument("bucket_interval: dimension is categorical");
  const auto& b = c->boundaries;
  if (index > b.size()) throw std::invalid_argument("bucket_interval: index out of range");
  if (index == 0) {
    const double width = b.size() > 1 ? b[1] - b[0] : 1.0;
    return {b[0] - width, b[0]};
  }
  if (index == b.size()) {
    const double width = b.size() > 1 ? b[b.size() - 1] - b[b.size() - 2] : 1.0;
    return {b.back(), b.back() + width};
  }
  return {b[index - 1], b[index]};
}

std::size_t BiasSpec::encoded_size() const {
  std::size_t n = 0;
  for (const auto& dim : dimensions_) n += dim.is_categorical() ? dim.bucket_count() : 1;
  return n;
}

std::vector<double> BiasSpec::encode(const BiasKey& key) const {
  validate_key(key);
  std::vector<double> out;
  out.reserve(encoded_size());
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (dimensions_[d].is_categorical()) {
      for (std::size_t i = 0; i < dimensions_[d].bucket_count(); ++i) {
        out.push_back(i == key.indices[d] ? 1.0 : 0.0);
      }
    } else {
      const auto [lo, hi] = bucket_interval(d, key.indices[d]);
      out.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

BiasKey discretize(std::span<const double> readings, const BiasSpec& spec) {
  const auto& dims = spec.dimensions();
  if (readings.size() != dims.size()) {
    throw std::invalid_argument("discretize: " + std::to_string(readings.size()) +
                                " readings for " + std::to_string(dims.size()) + " dimensions");
  }
  BiasKey key;
  key.indices.reserve(dims.size());
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const double v = readings[d];
    if (!std::isfinite(v)) {
      throw std::invalid_argument("discretize: non-finite reading for '" + dims[d].name + "'");
    }
    if (const auto* c = std::get_if<Categorical>(&dims[d].kind)) {
      if (v < 0.0 || v != std::floor(v) || v >= static_cast<double>(c->cardinality)) {
        throw std::invalid_argument("discretize: categorical code out of range for '" +
                                    dims[d].name + "'");
      }
      key.indices.push_back(static_cast<std::size_t>(v));
    } else {
      const auto& b = std::get<Continuous>(dims[d].kind).boundaries;
      // Number of boundaries <= v gives the half-open bucket index.
      key.indices.push_back(
          static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), v) - b.begin()));
    }
  }
  return key;
}

}  // namespace alignpxtr
