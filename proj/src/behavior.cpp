#include "alignpxtr/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "alignpxtr/conddist.hpp"
#include "alignpxtr/random.hpp"
#include "alignpxtr/serialization.hpp"
#include "alignpxtr/simulator.hpp"
#include "alignpxtr/special.hpp"

namespace alignpxtr {

using nlohmann::json;

std::string_view to_string(Link link) { return link == Link::identity ? "identity" : "logistic"; }

Link parse_link(std::string_view s) {
  if (s == "identity") return Link::identity;
  if (s == "logistic") return Link::logistic;
  throw std::invalid_argument("unknown link '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train.learning_rate must be positive");
  }
  if (epochs < 1) throw std::invalid_argument("train.epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size must be at least 1");
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    throw std::invalid_argument("train.l2_penalty must be non-negative");
  }
}

PredictorModel::PredictorModel(std::vector<double> weights, double intercept, Link link,
                               std::string signal_name)
    : weights_(std::move(weights)),
      intercept_(intercept),
      link_(link),
      signal_name_(std::move(signal_name)) {}

double PredictorModel::linear_term(std::span<const double> features) const {
  if (features.size() != weights_.size()) {
    throw std::invalid_argument("predict: expected " + std::to_string(weights_.size()) +
                                " features, got " + std::to_string(features.size()));
  }
  double t = intercept_;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (!std::isfinite(features[j])) throw std::invalid_argument("predict: non-finite feature");
    t += weights_[j] * features[j];
  }
  return t;
}

double PredictorModel::predict(std::span<const double> features) const {
  const double t = linear_term(features);
  return link_ == Link::identity ? t : logistic(t);
}

nlohmann::json PredictorModel::to_json() const {
  json doc;
  doc["format_version"] = kArtifactFormatVersion;
  doc["artifact"] = "predictor_model";
  doc["signal_name"] = signal_name_;
  doc["link"] = to_string(link_);
  doc["weights"] = weights_;
  doc["intercept"] = intercept_;
  doc["training_losses"] = losses_;
  return doc;
}

PredictorModel PredictorModel::from_json(const nlohmann::json& doc) {
  check_artifact(doc, "predictor_model");
  PredictorModel model(require_field(doc, "weights").get<std::vector<double>>(),
                       require_field(doc, "intercept").get<double>(),
                       parse_link(require_field(doc, "link").get<std::string>()),
                       require_field(doc, "signal_name").get<std::string>());
  model.set_training_losses(require_field(doc, "training_losses").get<std::vector<double>>());
  return model;
}

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::fabs(t))); }

/// Loss and gradient over the listed rows.
template <typename Rows>
LossGradient evaluate(std::span<const double> w, double b, const Dataset& data, double l2,
                      const Rows& rows, std::size_t count, Link link) {
  LossGradient out;
  out.weights.assign(w.size(), 0.0);
  if (count == 0) return out;
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t i = rows(r);
    const auto f = data.row(i);
    double t = b;
    for (std::size_t j = 0; j < w.size(); ++j) t += w[j] * f[j];
    const double s = data.target(i);
    double g = 0.0;
    if (link == Link::identity) {
      const double resid = t - s;
      out.loss += resid * resid;
      g = 2.0 * resid;
    } else {
      out.loss += softplus(t) - s * t;
      g = logistic(t) - s;
    }
    for (std::size_t j = 0; j < w.size(); ++j) out.weights[j] += g * f[j];
    out.intercept += g;
  }
  const double n = static_cast<double>(count);
  out.loss /= n;
  out.intercept /= n;
  for (std::size_t j = 0; j < w.size(); ++j) {
    out.weights[j] = out.weights[j] / n + 2.0 * l2 * w[j];
    out.loss += l2 * w[j] * w[j];
  }
  return out;
}

LossGradient evaluate_range(std::span<const double> weights, double intercept, const Dataset& data,
                            double l2, std::size_t begin, std::size_t end, Link link) {
  if (weights.size() != data.dimension()) {
    throw std::invalid_argument("loss: weight dimension does not match data");
  }
  end = std::min(end, data.size());
  if (begin > end) begin = end;
  return evaluate(
      weights, intercept, data, l2, [begin](std::size_t r) { return begin + r; }, end - begin,
      link);
}

PredictorModel train(const Dataset& data, const TrainConfig& config, std::string signal_name,
                     Link link) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("train: empty data");
  const std::size_t n = data.size();
  std::vector<double> w(data.dimension(), 0.0);
  double b = 0.0;
  std::vector<double> losses;
  losses.push_back(evaluate_range(w, b, data, config.l2_penalty, 0, n, link).loss);

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      const auto grad = evaluate(
          w, b, data, config.l2_penalty,
          [&](std::size_t r) { return order[start + r]; }, count, link);
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= config.learning_rate * grad.weights[j];
      b -= config.learning_rate * grad.intercept;
    }
    const double loss = evaluate_range(w, b, data, config.l2_penalty, 0, n, link).loss;
    if (!std::isfinite(loss)) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    }
    losses.push_back(loss);
  }
  PredictorModel model(std::move(w), b, link, std::move(signal_name));
  model.set_training_losses(std::move(losses));
  return model;
}

}  // namespace

LossGradient mse_loss_gradient(std::span<const double> weights, double intercept,
                               const Dataset& data, double l2, std::size_t begin, std::size_t end) {
  return evaluate_range(weights, intercept, data, l2, begin, end, Link::identity);
}

LossGradient bce_loss_gradient(std::span<const double> weights, double intercept,
                               const Dataset& data, double l2, std::size_t begin, std::size_t end) {
  return evaluate_range(weights, intercept, data, l2, begin, end, Link::logistic);
}

PredictorModel train_regressor(const Dataset& data, const TrainConfig& config,
                               std::string signal_name) {
  return train(data, config, std::move(signal_name), Link::identity);
}

PredictorModel train_classifier(const Dataset& data, const TrainConfig& config,
                                std::string signal_name) {
  for (double s : data.targets()) {
    if (s != 0.0 && s != 1.0) throw std::invalid_argument("train_classifier: labels must be 0 or 1");
  }
  return train(data, config, std::move(signal_name), Link::logistic);
}

double oracle_predict(const GroundTruthRecord& record, std::string_view signal) {
  const auto it = record.latent.find(std::string(signal));
  if (it == record.latent.end()) {
    throw std::invalid_argument("oracle_predict: unknown signal '" + std::string(signal) + "'");
  }
  return it->second;
}

}  // namespace alignpxtr
