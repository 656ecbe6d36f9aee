#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "alignpxtr/bias.hpp"

namespace alignpxtr {

enum class SignalKind { continuous, binary };
std::string_view to_string(SignalKind k);
SignalKind parse_signal_kind(std::string_view s);

/// Per-bucket parameter: base + sum over dimensions of an additive effect,
/// unless the bucket has an explicit override.
struct BucketParameter {
  double base = 0.0;
  /// effects[d][i]: shift for bucket i of dimension d. May be empty.
  std::vector<std::vector<double>> effects;
  std::map<BiasKey, double> overrides;

  double at(const BiasKey& key) const;
  bool operator==(const BucketParameter&) const = default;
};

/// Generative law of one signal.
///
/// continuous: x = exp(mu(y) + sigma(y) * PhiInv(z)), s = x * exp(noise * eps).
/// binary:     x = Phi(a(y) + slope * PhiInv(z)),    s ~ Bernoulli(x).
struct SignalGenerator {
  std::string name;
  SignalKind kind = SignalKind::continuous;
  BucketParameter location;  ///< mu(y) or a(y)
  BucketParameter scale;     ///< sigma(y); continuous only
  double slope = 1.0;        ///< b; binary only
  double noise_scale = 0.0;

  bool operator==(const SignalGenerator&) const = default;
};

struct SimConfig {
  std::size_t n_records = 1000;
  std::uint64_t seed = 0;
  BiasSpec spec;
  /// One probability vector per dimension.
  std::vector<std::vector<double>> bucket_probabilities;
  std::vector<SignalGenerator> signals;
  /// Noise on the observable interest feature PhiInv(z) + noise * eps.
  double feature_noise = 0.5;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

struct GroundTruthRecord {
  std::uint64_t id = 0;
  double z_true = 0.5;
  std::vector<double> bias_values;
  BiasKey key;
  double interest_feature = 0.0;
  std::map<std::string, double> latent;
  std::map<std::string, double> observed;

  bool operator==(const GroundTruthRecord&) const = default;
};

/// Draws config.n_records records from the causal graph. z and the bias
/// buckets are drawn independently; x is the exact z-quantile of the bucket's
/// conditional law.
std::vector<GroundTruthRecord> generate(const SimConfig& config);

/// Records [first, first + count) of shard `shard`. Each shard has its own
/// derived stream, so shards can be generated in any order or in parallel.
std::vector<GroundTruthRecord> generate_shard(const SimConfig& config, std::uint64_t shard,
                                              std::uint64_t first_id, std::size_t count);

/// Latent value for a given interest level, without randomness.
double latent_behavior(const SignalGenerator& signal, const BiasKey& key, double z);

/// Writes records in the CSV data format; returns the number of rows.
std::size_t export_records(const std::vector<GroundTruthRecord>& records, const SimConfig& config,
                           const std::filesystem::path& path);
std::vector<GroundTruthRecord> import_records(const SimConfig& config,
                                              const std::filesystem::path& path);

}  // namespace alignpxtr
