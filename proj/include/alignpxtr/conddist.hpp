#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "alignpxtr/bias.hpp"
#include "alignpxtr/exact_sum.hpp"

namespace alignpxtr {

/// Space in which conditional statistics are estimated. Queries take raw
/// values and apply the transform internally.
enum class TransformSpace { identity, log1p };
enum class EstimatorKind { empirical, parametric };
enum class Family { gaussian, lognormal };

std::string_view to_string(TransformSpace t);
std::string_view to_string(EstimatorKind k);
std::string_view to_string(Family f);
TransformSpace parse_transform_space(std::string_view s);
EstimatorKind parse_estimator_kind(std::string_view s);
Family parse_family(std::string_view s);

double apply_transform(TransformSpace t, double x);
double invert_transform(TransformSpace t, double v);

/// Probability assigned to a value: `mid` is the point CDF, [left, right] is
/// the probability mass of the atom at that value (left == right off atoms).
struct CdfValue {
  double mid = 0.0;
  double left = 0.0;
  double right = 0.0;
};

/// Hazen quantile of sorted values at level tau: order statistics sit at
/// plotting positions (i - 0.5)/n and are joined linearly.
double hazen_quantile(std::span<const double> sorted, double tau);

/// Compressed summary of one bucket: quantile values at levels (j - 0.5)/G.
///
/// While the bucket holds at most G samples they are retained as well, so
/// queries and merges of small buckets are exact. Beyond G only the grid is
/// kept.
class EmpiricalSummary {
 public:
  EmpiricalSummary() = default;

  static EmpiricalSummary fit(std::vector<double> values, std::size_t grid_size);
  static EmpiricalSummary merge(const EmpiricalSummary& a, const EmpiricalSummary& b,
                                std::size_t grid_size);
  /// Rebuilds a summary from serialized fields; checks the invariants.
  static EmpiricalSummary restore(std::vector<double> grid, std::vector<double> samples,
                                  std::uint64_t count, ExactSum sum, double min, double max);

  std::uint64_t count() const { return count_; }
  double mean() const;
  double min() const { return min_; }
  double max() const { return max_; }
  std::span<const double> grid() const { return grid_; }
  std::span<const double> samples() const { return samples_; }
  const ExactSum& sum() const { return sum_; }

  /// Hazen empirical CDF, clamped to [1/(2n), 1 - 1/(2n)].
  CdfValue cdf(double x) const;
  /// Generalized inverse; 0 maps to the sample minimum and 1 to the maximum.
  double quantile(double tau) const;

 private:
  std::span<const double> knots() const;

  std::vector<double> grid_;
  std::vector<double> samples_;
  std::uint64_t count_ = 0;
  ExactSum sum_;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct ParametricParams {
  Family family = Family::gaussian;
  double location = 0.0;
  double scale = 1.0;
};

/// CDF of a fitted family. A zero scale is treated as a point mass at the
/// location (or exp(location) for lognormal) with CDF 1/2 at the atom.
CdfValue parametric_cdf(const ParametricParams& p, double x);
double parametric_quantile(const ParametricParams& p, double tau);

/// Maximum-likelihood fit of one bucket from exact sufficient statistics.
/// Gaussian uses the population (1/n) variance; lognormal does the same on
/// log values.
class ParametricSummary {
 public:
  explicit ParametricSummary(Family family = Family::gaussian) : family_(family) {}

  static ParametricSummary fit(std::span<const double> values, Family family);
  static ParametricSummary merge(const ParametricSummary& a, const ParametricSummary& b);
  static ParametricSummary restore(Family family, std::uint64_t count, ExactSum sum_values,
                                   ExactSum sum_t, ExactSum sum_t2);

  Family family() const { return family_; }
  std::uint64_t count() const { return count_; }
  double location() const;
  /// Zero for a single sample or identical samples.
  double scale() const;
  /// Arithmetic mean of the fitted values.
  double mean() const;

  const ExactSum& sum_values() const { return sum_values_; }
  const ExactSum& sum_t() const { return sum_t_; }
  const ExactSum& sum_t2() const { return sum_t2_; }

 private:
  Family family_;
  std::uint64_t count_ = 0;
  ExactSum sum_values_;
  ExactSum sum_t_;
  ExactSum sum_t2_;
};

using DistributionSummary = std::variant<EmpiricalSummary, ParametricSummary>;

std::uint64_t summary_count(const DistributionSummary& s);

struct ConditionalOptions {
  std::string signal_name;
  std::size_t grid_size = 1024;
  std::size_t min_bucket_count = 100;
  double shrinkage_strength = 50.0;
  TransformSpace transform = TransformSpace::identity;

  void validate() const;
  bool operator==(const ConditionalOptions&) const = default;
};

struct Observation {
  double x = 0.0;
  BiasKey key;
};

/// Per-bucket estimates of F(X | Y = y) and E[X | Y = y] with a global
/// fallback fitted on every record.
///
/// Buckets holding fewer than `min_bucket_count` samples answer distribution
/// queries with a blend toward the fallback weighted n : k, where k is the
/// shrinkage strength. Conditional means are always blended that way. Empty
/// buckets answer with the fallback. A fitted model is immutable and all
/// queries are safe to call concurrently.
class ConditionalModel {
 public:
  static ConditionalModel fit_empirical(std::span<const Observation> records, const BiasSpec& spec,
                                        const ConditionalOptions& options);
  static ConditionalModel fit_parametric(std::span<const Observation> records,
                                         const BiasSpec& spec, Family family,
                                         const ConditionalOptions& options);
  /// Model without data; the identity element of merge().
  static ConditionalModel empty(const BiasSpec& spec, EstimatorKind kind, Family family,
                                const ConditionalOptions& options);

  double cdf(const BiasKey& key, double x) const;
  CdfValue cdf_value(const BiasKey& key, double x) const;
  double inv_cdf(const BiasKey& key, double tau) const;
  /// Shrunken mean in model (transform) space.
  double cond_mean(const BiasKey& key) const;

  double to_model_space(double x) const { return apply_transform(options_.transform, x); }
  double from_model_space(double v) const { return invert_transform(options_.transform, v); }

  std::uint64_t count(const BiasKey& key) const;
  std::uint64_t total_count() const { return summary_count(fallback_); }
  bool is_sparse(const BiasKey& key) const { return count(key) < options_.min_bucket_count; }

  const BiasSpec& spec() const { return spec_; }
  const ConditionalOptions& options() const { return options_; }
  EstimatorKind estimator() const { return kind_; }
  Family family() const { return family_; }
  const std::map<BiasKey, DistributionSummary>& buckets() const { return buckets_; }
  const DistributionSummary& fallback() const { return fallback_; }

  nlohmann::json to_json() const;
  static ConditionalModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static ConditionalModel load(const std::filesystem::path& path);

  /// Combines models fitted on disjoint partitions of one stream.
  friend ConditionalModel merge(const ConditionalModel& a, const ConditionalModel& b);

 private:
  ConditionalModel(BiasSpec spec, EstimatorKind kind, Family family, ConditionalOptions options,
                   DistributionSummary fallback);

  const DistributionSummary* find(const BiasKey& key) const;
  ParametricParams effective_params(const ParametricSummary* bucket) const;
  double weight_of(std::uint64_t n) const;
  void require_data() const;

  BiasSpec spec_;
  EstimatorKind kind_;
  Family family_;
  ConditionalOptions options_;
  std::map<BiasKey, DistributionSummary> buckets_;
  DistributionSummary fallback_;
};

ConditionalModel merge(const ConditionalModel& a, const ConditionalModel& b);

/// Version tag written into every artifact document.
inline constexpr int kArtifactFormatVersion = 1;

}  // namespace alignpxtr
