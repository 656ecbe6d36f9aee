#include "alignpxtr/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "alignpxtr/random.hpp"
#include "alignpxtr/serialization.hpp"

namespace alignpxtr {

using nlohmann::json;

void QuantileRegConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("quantile_regression.learning_rate must be positive");
  }
  if (epochs < 1) throw std::invalid_argument("quantile_regression.epochs must be at least 1");
  if (batch_size < 1) {
    throw std::invalid_argument("quantile_regression.batch_size must be at least 1");
  }
}

double pinball_loss(double residual, double tau) {
  return residual * (tau - (residual < 0.0 ? 1.0 : 0.0));
}

namespace {

void check_levels(std::span<const double> taus) {
  if (taus.empty()) throw std::invalid_argument("tau_levels must not be empty");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0 && taus[i] < 1.0)) {
      throw std::invalid_argument("tau levels must lie strictly inside (0, 1)");
    }
    if (i > 0 && !(taus[i - 1] < taus[i])) {
      throw std::invalid_argument("tau levels must be strictly increasing");
    }
  }
}

}  // namespace

QuantileRegModel::QuantileRegModel(std::size_t dimension, std::vector<Level> levels,
                                   std::optional<BiasSpec> encoding)
    : dimension_(dimension), levels_(std::move(levels)), encoding_(std::move(encoding)) {
  check_levels(tau_levels());
  for (const auto& level : levels_) {
    if (level.weights.size() != dimension_) {
      throw std::invalid_argument("quantile regression level has wrong weight count");
    }
  }
  if (encoding_ && encoding_->encoded_size() != dimension_) {
    throw std::invalid_argument("quantile regression encoding does not match dimension");
  }
}

std::vector<double> QuantileRegModel::tau_levels() const {
  std::vector<double> taus;
  taus.reserve(levels_.size());
  for (const auto& l : levels_) taus.push_back(l.tau);
  return taus;
}

double QuantileRegModel::predict(std::size_t level, std::span<const double> features) const {
  if (features.size() != dimension_) {
    throw std::invalid_argument("quantile regression: feature dimension mismatch");
  }
  const auto& l = levels_.at(level);
  double acc = l.intercept;
  for (std::size_t j = 0; j < dimension_; ++j) acc += l.weights[j] * features[j];
  return acc;
}

std::vector<double> QuantileRegModel::predict_quantiles(std::span<const double> features) const {
  std::vector<double> q(levels_.size());
  for (std::size_t i = 0; i < levels_.size(); ++i) q[i] = predict(i, features);
  std::sort(q.begin(), q.end());
  return q;
}

CdfValue QuantileRegModel::cdf(std::span<const double> features, double x) const {
  if (std::isnan(x)) throw std::invalid_argument("cdf: x is NaN");
  const auto q = predict_quantiles(features);
  const std::size_t k = q.size();
  const auto lo = static_cast<std::size_t>(std::lower_bound(q.begin(), q.end(), x) - q.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), x) - q.begin());
  double t = 0.0;
  if (lo < hi) {
    t = 0.5 * (levels_[lo].tau + levels_[hi - 1].tau);
  } else if (lo == 0) {
    t = 0.5 * levels_.front().tau;
  } else if (lo == k) {
    t = 0.5 * (1.0 + levels_.back().tau);
  } else {
    const double frac = (x - q[lo - 1]) / (q[lo] - q[lo - 1]);
    t = levels_[lo - 1].tau + frac * (levels_[lo].tau - levels_[lo - 1].tau);
  }
  return {t, t, t};
}

double QuantileRegModel::inv_cdf(std::span<const double> features, double tau) const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("inv_cdf: tau outside [0, 1]");
  const auto q = predict_quantiles(features);
  if (tau <= levels_.front().tau) return q.front();
  if (tau >= levels_.back().tau) return q.back();
  std::size_t i = 1;
  while (levels_[i].tau < tau) ++i;
  const double frac = (tau - levels_[i - 1].tau) / (levels_[i].tau - levels_[i - 1].tau);
  return q[i - 1] + frac * (q[i] - q[i - 1]);
}

std::vector<double> QuantileRegModel::encode(const BiasKey& key) const {
  if (!encoding_) throw std::logic_error("quantile regression model has no bias encoding");
  return encoding_->encode(key);
}

double QuantileRegModel::cdf(const BiasKey& key, double x) const { return cdf(encode(key), x).mid; }

double QuantileRegModel::inv_cdf(const BiasKey& key, double tau) const {
  return inv_cdf(encode(key), tau);
}

nlohmann::json QuantileRegModel::to_json() const {
  json doc;
  doc["format_version"] = kArtifactFormatVersion;
  doc["artifact"] = "quantile_regression_model";
  doc["dimension"] = dimension_;
  json levels = json::array();
  for (const auto& l : levels_) {
    levels.push_back({{"tau", l.tau},
                      {"weights", l.weights},
                      {"intercept", l.intercept},
                      {"epoch_losses", l.epoch_losses}});
  }
  doc["levels"] = std::move(levels);
  doc["bias_spec"] = encoding_ ? bias_spec_to_json(*encoding_) : json(nullptr);
  return doc;
}

QuantileRegModel QuantileRegModel::from_json(const nlohmann::json& doc) {
  check_artifact(doc, "quantile_regression_model");
  std::vector<Level> levels;
  for (const auto& l : require_field(doc, "levels")) {
    levels.push_back({require_field(l, "tau").get<double>(),
                      require_field(l, "weights").get<std::vector<double>>(),
                      require_field(l, "intercept").get<double>(),
                      require_field(l, "epoch_losses").get<std::vector<double>>()});
  }
  std::optional<BiasSpec> encoding;
  if (const auto& spec = require_field(doc, "bias_spec"); !spec.is_null()) {
    encoding = bias_spec_from_json(spec);
  }
  return QuantileRegModel(require_field(doc, "dimension").get<std::size_t>(), std::move(levels),
                          std::move(encoding));
}

QuantileRegModel fit_quantile_regression(const Dataset& data, std::span<const double> tau_levels,
                                         const QuantileRegConfig& config) {
  config.validate();
  check_levels(tau_levels);
  if (data.empty()) throw std::invalid_argument("fit_quantile_regression: empty data");

  const std::size_t n = data.size();
  const std::size_t dim = data.dimension();
  const double nd = static_cast<double>(n);

  // Standardize features for conditioning; coefficients are mapped back at the end.
  std::vector<double> mean(dim, 0.0);
  std::vector<double> sd(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= nd;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < dim; ++j) sd[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
  }
  for (auto& s : sd) {
    s = std::sqrt(s / nd);
    if (!(s > 0.0)) s = 1.0;
  }
  std::vector<double> z(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < dim; ++j) z[i * dim + j] = (row[j] - mean[j]) / sd[j];
  }

  const auto targets = data.targets();
  std::vector<double> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  const double target_mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / nd;
  double target_var = 0.0;
  for (double t : sorted) target_var += (t - target_mean) * (t - target_mean);
  double target_scale = std::sqrt(target_var / nd);
  if (!(target_scale > 0.0)) target_scale = 1.0;
  const double base_step = config.learning_rate * target_scale;

  const auto predict_std = [&](const std::vector<double>& theta, std::size_t i) {
    double acc = theta[dim];
    for (std::size_t j = 0; j < dim; ++j) acc += theta[j] * z[i * dim + j];
    return acc;
  };

  std::vector<QuantileRegModel::Level> levels;
  for (std::size_t level = 0; level < tau_levels.size(); ++level) {
    const double tau = tau_levels[level];
    Rng rng(derive_seed(config.seed, level));
    std::vector<double> theta(dim + 1, 0.0);
    theta[dim] = hazen_quantile(sorted, tau);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(dim + 1);
    std::vector<double> average(dim + 1);
    std::vector<double> losses;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      const double step = base_step / std::sqrt(static_cast<double>(epoch + 1));
      std::fill(average.begin(), average.end(), 0.0);
      std::size_t steps = 0;
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t end = std::min(n, start + config.batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t b = start; b < end; ++b) {
          const std::size_t i = order[b];
          const double r = targets[i] - predict_std(theta, i);
          // d(loss)/d(prediction); zero is a valid subgradient at r == 0
          const double g = r < 0.0 ? 1.0 - tau : (r > 0.0 ? -tau : 0.0);
          for (std::size_t j = 0; j < dim; ++j) grad[j] += g * z[i * dim + j];
          grad[dim] += g;
        }
        const double scale = step / static_cast<double>(end - start);
        for (std::size_t j = 0; j <= dim; ++j) {
          theta[j] -= scale * grad[j];
          average[j] += theta[j];
        }
        ++steps;
      }
      for (std::size_t j = 0; j <= dim; ++j) theta[j] = average[j] / static_cast<double>(steps);

      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) loss += pinball_loss(targets[i] - predict_std(theta, i), tau);
      loss /= nd;
      if (!std::isfinite(loss)) {
        throw std::runtime_error("quantile regression diverged at epoch " + std::to_string(epoch));
      }
      losses.push_back(loss);
    }

    QuantileRegModel::Level out;
    out.tau = tau;
    out.weights.resize(dim);
    out.intercept = theta[dim];
    for (std::size_t j = 0; j < dim; ++j) {
      out.weights[j] = theta[j] / sd[j];
      out.intercept -= out.weights[j] * mean[j];
    }
    out.epoch_losses = std::move(losses);
    levels.push_back(std::move(out));
  }
  return QuantileRegModel(dim, std::move(levels));
}

QuantileRegModel fit_quantile_regression(std::span<const Observation> records,
                                         const BiasSpec& spec,
                                         std::span<const double> tau_levels,
                                         const QuantileRegConfig& config) {
  Dataset data(spec.encoded_size());
  for (const auto& r : records) data.add(spec.encode(r.key), r.x);
  const auto fitted = fit_quantile_regression(data, tau_levels, config);
  return QuantileRegModel(fitted.dimension(), fitted.levels(), spec);
}

}  // namespace alignpxtr
