#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "alignpxtr/bias.hpp"
#include "alignpxtr/conddist.hpp"
#include "alignpxtr/dataset.hpp"

namespace alignpxtr {

struct QuantileRegConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 40;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const QuantileRegConfig&) const = default;
};

/// Pinball loss r * (tau - 1[r < 0]) of the residual r = x - prediction.
double pinball_loss(double residual, double tau);

/// Linear conditional quantile curves, one per tau level.
class QuantileRegModel {
 public:
  struct Level {
    double tau = 0.5;
    std::vector<double> weights;
    double intercept = 0.0;
    /// Mean training pinball loss after each epoch.
    std::vector<double> epoch_losses;
  };

  QuantileRegModel(std::size_t dimension, std::vector<Level> levels,
                   std::optional<BiasSpec> encoding = std::nullopt);

  std::size_t dimension() const { return dimension_; }
  const std::vector<Level>& levels() const { return levels_; }
  std::vector<double> tau_levels() const;

  /// Raw per-level prediction (may cross).
  double predict(std::size_t level, std::span<const double> features) const;
  /// Per-level predictions sorted ascending to repair crossing.
  std::vector<double> predict_quantiles(std::span<const double> features) const;

  /// CDF by linear interpolation between the predicted quantiles. Below the
  /// lowest curve it returns tau_1 / 2 and above the highest (1 + tau_K) / 2.
  CdfValue cdf(std::span<const double> features, double x) const;
  double inv_cdf(std::span<const double> features, double tau) const;

  /// Bias-key queries, available when the model was fitted on an encoded
  /// BiasSpec.
  const std::optional<BiasSpec>& encoding() const { return encoding_; }
  double cdf(const BiasKey& key, double x) const;
  double inv_cdf(const BiasKey& key, double tau) const;

  nlohmann::json to_json() const;
  static QuantileRegModel from_json(const nlohmann::json& doc);

 private:
  std::vector<double> encode(const BiasKey& key) const;

  std::size_t dimension_;
  std::vector<Level> levels_;
  std::optional<BiasSpec> encoding_;
};

/// Fits each level by seeded mini-batch subgradient descent on the pinball
/// loss. Features are standardized internally; each epoch's model is the
/// average of that epoch's iterates.
QuantileRegModel fit_quantile_regression(const Dataset& data, std::span<const double> tau_levels,
                                         const QuantileRegConfig& config);

/// Same, with features taken from the BiasSpec encoding of each record's key.
QuantileRegModel fit_quantile_regression(std::span<const Observation> records,
                                         const BiasSpec& spec,
                                         std::span<const double> tau_levels,
                                         const QuantileRegConfig& config);

}  // namespace alignpxtr
