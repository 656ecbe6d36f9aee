#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "alignpxtr/dataset.hpp"

namespace alignpxtr {

struct GroundTruthRecord;

enum class Link { identity, logistic };
std::string_view to_string(Link link);
Link parse_link(std::string_view s);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  double l2_penalty = 0.0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Linear predictor x = link(w . f + b).
class PredictorModel {
 public:
  PredictorModel(std::vector<double> weights, double intercept, Link link,
                 std::string signal_name = {});

  double predict(std::span<const double> features) const;
  double linear_term(std::span<const double> features) const;

  std::span<const double> weights() const { return weights_; }
  double intercept() const { return intercept_; }
  Link link() const { return link_; }
  const std::string& signal_name() const { return signal_name_; }
  std::size_t dimension() const { return weights_.size(); }

  /// Full-data training loss before the first epoch and after each epoch.
  std::span<const double> training_losses() const { return losses_; }
  void set_training_losses(std::vector<double> losses) { losses_ = std::move(losses); }

  nlohmann::json to_json() const;
  static PredictorModel from_json(const nlohmann::json& doc);

 private:
  std::vector<double> weights_;
  double intercept_;
  Link link_;
  std::string signal_name_;
  std::vector<double> losses_;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> weights;
  double intercept = 0.0;
};

/// mean((w.f + b - s)^2) + l2 |w|^2 over rows [begin, end) of `data`.
LossGradient mse_loss_gradient(std::span<const double> weights, double intercept,
                               const Dataset& data, double l2, std::size_t begin = 0,
                               std::size_t end = static_cast<std::size_t>(-1));
/// Mean binary cross-entropy of sigmoid(w.f + b) plus l2 |w|^2.
LossGradient bce_loss_gradient(std::span<const double> weights, double intercept,
                               const Dataset& data, double l2, std::size_t begin = 0,
                               std::size_t end = static_cast<std::size_t>(-1));

PredictorModel train_regressor(const Dataset& data, const TrainConfig& config,
                               std::string signal_name = {});
/// Targets must be 0 or 1.
PredictorModel train_classifier(const Dataset& data, const TrainConfig& config,
                                std::string signal_name = {});

/// The simulator's latent behavior for `signal`, bypassing any predictor.
double oracle_predict(const GroundTruthRecord& record, std::string_view signal);

}  // namespace alignpxtr
