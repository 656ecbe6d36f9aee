#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "alignpxtr/align.hpp"
#include "alignpxtr/behavior.hpp"
#include "alignpxtr/bias.hpp"
#include "alignpxtr/conddist.hpp"
#include "alignpxtr/quantile_regression.hpp"
#include "alignpxtr/simulator.hpp"

namespace alignpxtr {

/// Where a signal's predicted x comes from.
///  oracle  - the simulator's latent column
///  trained - a linear/logistic model trained on the observed behavior
///  column  - an x.<signal> column already present in the data
enum class PredictorMode { oracle, trained, column };
std::string_view to_string(PredictorMode m);
PredictorMode parse_predictor_mode(std::string_view s);

struct PredictorSetup {
  PredictorMode mode = PredictorMode::oracle;
  TrainConfig train;
  bool include_bias_features = true;
  bool operator==(const PredictorSetup&) const = default;
};

enum class ConddistEstimator { empirical, parametric, quantile_regression };
std::string_view to_string(ConddistEstimator e);
ConddistEstimator parse_conddist_estimator(std::string_view s);

struct ConddistSetup {
  ConddistEstimator estimator = ConddistEstimator::empirical;
  std::size_t grid_size = 1024;
  std::size_t min_bucket_count = 100;
  double shrinkage_strength = 50.0;
  TransformSpace transform = TransformSpace::identity;
  Family family = Family::gaussian;
  std::vector<double> tau_levels;
  QuantileRegConfig quantile_regression;

  ConditionalOptions options(const std::string& signal) const;
  bool operator==(const ConddistSetup&) const = default;
};

struct SignalSetup {
  SignalGenerator generator;  ///< name and kind live here
  PredictorSetup predictor;
  ConddistSetup conddist;
  SignalAlignment alignment;
  bool operator==(const SignalSetup&) const = default;

  const std::string& name() const { return generator.name; }
};

struct EvaluationSetup {
  std::size_t mi_bins = 20;
  std::size_t permutations = 8;
  double ks_bucket_threshold = 0.02;
  double ks_global_threshold = 0.005;
  std::size_t min_bucket_for_ks = 1000;
  bool operator==(const EvaluationSetup&) const = default;
};

enum class TieSetting { deterministic, randomized };

struct ExperimentConfig {
  std::uint64_t seed = 0;
  BiasSpec spec;
  std::size_t n_records = 1000;
  std::vector<std::vector<double>> bucket_probabilities;
  double feature_noise = 0.5;
  std::vector<SignalSetup> signals;
  std::map<std::string, double> weights;
  TieSetting tie = TieSetting::deterministic;
  EvaluationSetup evaluation;
  std::filesystem::path output_directory = "alignpxtr_out";

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  SimConfig sim_config() const;
  FusionWeights fusion_weights() const;
  TieMode tie_mode() const;
  const SignalSetup& signal(std::string_view name) const;

  nlohmann::json to_json() const;
  /// Missing optional fields take their defaults.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// SHA-256 of the canonical document with the master seed removed.
  std::string fingerprint() const;
  /// SHA-256 of the canonical BiasSpec document.
  std::string bias_spec_fingerprint() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Seed streams derived from the master seed.
namespace seed_stream {
inline constexpr std::uint64_t kSimulator = 1;
inline constexpr std::uint64_t kPermutation = 2;
inline constexpr std::uint64_t kTies = 3;
inline constexpr std::uint64_t kTrainBase = 100;
}  // namespace seed_stream

/// The reference scenario: duration (4 buckets) x category (5 buckets), a
/// lognormal watch-time signal and a binary like signal, 200k records.
ExperimentConfig default_experiment();

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace alignpxtr
