#include "alignpxtr/align.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alignpxtr/random.hpp"
#include "alignpxtr/serialization.hpp"
#include "alignpxtr/special.hpp"

namespace alignpxtr {

using nlohmann::json;

void validate_target(const TargetDistribution& target) {
  if (const auto* g = std::get_if<GaussianTarget>(&target)) {
    if (!std::isfinite(g->location) || !(g->scale > 0.0) || !std::isfinite(g->scale)) {
      throw std::invalid_argument("gaussian target needs a finite location and positive scale");
    }
  } else if (const auto* e = std::get_if<EmpiricalTarget>(&target)) {
    if (e->quantiles.size() < 2) {
      throw std::invalid_argument("empirical target needs at least 2 quantiles");
    }
    for (std::size_t i = 0; i < e->quantiles.size(); ++i) {
      if (!std::isfinite(e->quantiles[i]) || (i > 0 && e->quantiles[i] < e->quantiles[i - 1])) {
        throw std::invalid_argument("empirical target quantiles must be finite and non-decreasing");
      }
    }
  }
}

nlohmann::json target_to_json(const TargetDistribution& target) {
  if (std::holds_alternative<UniformTarget>(target)) return {{"kind", "uniform01"}};
  if (const auto* g = std::get_if<GaussianTarget>(&target)) {
    return {{"kind", "gaussian"}, {"location", g->location}, {"scale", g->scale}};
  }
  return {{"kind", "empirical"}, {"quantiles", std::get<EmpiricalTarget>(target).quantiles}};
}

TargetDistribution target_from_json(const nlohmann::json& doc) {
  const auto kind = require_field(doc, "kind").get<std::string>();
  TargetDistribution target;
  if (kind == "uniform01") {
    target = UniformTarget{};
  } else if (kind == "gaussian") {
    target = GaussianTarget{doc.value("location", 0.0), doc.value("scale", 1.0)};
  } else if (kind == "empirical") {
    target = EmpiricalTarget{require_field(doc, "quantiles").get<std::vector<double>>()};
  } else {
    throw std::invalid_argument("unknown target kind '" + kind + "'");
  }
  validate_target(target);
  return target;
}

double target_cdf(const TargetDistribution& target, double v) {
  if (std::holds_alternative<UniformTarget>(target)) return std::clamp(v, 0.0, 1.0);
  if (const auto* g = std::get_if<GaussianTarget>(&target)) {
    return normal_cdf((v - g->location) / g->scale);
  }
  const auto& q = std::get<EmpiricalTarget>(target).quantiles;
  const double last = static_cast<double>(q.size() - 1);
  const auto lo = static_cast<std::size_t>(std::lower_bound(q.begin(), q.end(), v) - q.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), v) - q.begin());
  if (lo < hi) return 0.5 * static_cast<double>(lo + hi - 1) / last;
  if (lo == 0) return 0.0;
  if (lo == q.size()) return 1.0;
  const double frac = (v - q[lo - 1]) / (q[lo] - q[lo - 1]);
  return (static_cast<double>(lo - 1) + frac) / last;
}

double target_quantile(const TargetDistribution& target, double z) {
  if (std::holds_alternative<UniformTarget>(target)) return z;
  if (const auto* g = std::get_if<GaussianTarget>(&target)) {
    return g->location + g->scale * normal_quantile(z);
  }
  const auto& q = std::get<EmpiricalTarget>(target).quantiles;
  const double pos = z * static_cast<double>(q.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), q.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return q[i] + frac * (q[i + 1] - q[i]);
}

double to_target(double z, const TargetDistribution& target) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("to_target: z outside [0, 1]");
  validate_target(target);
  return target_quantile(target, z);
}

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": x must be finite");
}

double resolve_ties(const CdfValue& c, const TieMode& tie) {
  if (const auto* r = std::get_if<Randomized>(&tie); r != nullptr && c.left < c.right) {
    Rng rng(r->seed);
    return c.left + rng.uniform_open() * (c.right - c.left);
  }
  return c.mid;
}

}  // namespace

double quantile_map(const ConditionalModel& model, const BiasKey& key, double x,
                    const TieMode& tie) {
  require_finite(x, "quantile_map");
  return resolve_ties(model.cdf_value(key, x), tie);
}

double quantile_map(const QuantileRegModel& model, const BiasKey& key, double x,
                    const TieMode& /*tie*/) {
  require_finite(x, "quantile_map");
  return model.cdf(key, x);
}

double quantile_map(const SignalModel& model, const BiasKey& key, double x, const TieMode& tie) {
  return std::visit([&](const auto& m) { return quantile_map(m, key, x, tie); }, model);
}

double mean_align(const ConditionalModel& model, const BiasKey& key, double x) {
  require_finite(x, "mean_align");
  const double v = model.to_model_space(x);
  if (!std::isfinite(v)) throw std::invalid_argument("mean_align: x outside the transform domain");
  return v - model.cond_mean(key);
}

std::string_view to_string(AlignMethod m) { return m == AlignMethod::quantile ? "quantile" : "mean"; }

AlignMethod parse_align_method(std::string_view s) {
  if (s == "quantile") return AlignMethod::quantile;
  if (s == "mean") return AlignMethod::mean;
  throw std::invalid_argument("unknown alignment method '" + std::string(s) + "'");
}

FusionWeights::FusionWeights(std::map<std::string, double> weights) : weights_(std::move(weights)) {
  bool any_nonzero = false;
  for (const auto& [name, w] : weights_) {
    if (!std::isfinite(w)) throw std::invalid_argument("fusion weight for '" + name + "' is not finite");
    any_nonzero = any_nonzero || w != 0.0;
  }
  if (!any_nonzero) throw std::invalid_argument("fusion weights: at least one must be nonzero");
}

double fuse(const std::map<std::string, double>& per_signal, const FusionWeights& weights) {
  double total = 0.0;
  for (const auto& [name, w] : weights.weights()) {
    if (w == 0.0) continue;
    const auto it = per_signal.find(name);
    if (it == per_signal.end()) {
      throw std::invalid_argument("fuse: no score for weighted signal '" + name + "'");
    }
    if (!std::isfinite(it->second)) {
      throw std::invalid_argument("fuse: non-finite score for signal '" + name + "'");
    }
    total += w * it->second;
  }
  return total;
}

AlignedScore score_pipeline(const ScoreRequest& request, const PipelineSetup& setup,
                            std::uint64_t row) {
  AlignedScore out;
  std::map<std::string, double> values;
  std::uint64_t stream = 0;
  for (const auto& [signal, alignment] : setup.alignment) {
    const auto pred = request.predictions.find(signal);
    const auto key = request.keys.find(signal);
    const auto model = setup.models.find(signal);
    if (pred == request.predictions.end()) {
      throw std::invalid_argument("signal '" + signal + "': missing prediction");
    }
    if (key == request.keys.end()) throw std::invalid_argument("signal '" + signal + "': missing key");
    if (model == setup.models.end()) {
      throw std::invalid_argument("signal '" + signal + "': no fitted model");
    }

    SignalScore score;
    score.method = alignment.method;
    if (alignment.method == AlignMethod::quantile) {
      TieMode tie = setup.tie;
      if (const auto* r = std::get_if<Randomized>(&setup.tie)) {
        tie = Randomized{derive_seed(derive_seed(r->seed, row), stream)};
      }
      const double z = quantile_map(model->second, key->second, pred->second, tie);
      score.z = to_target(z, alignment.target);
    } else {
      const auto* cm = std::get_if<ConditionalModel>(&model->second);
      if (cm == nullptr) {
        throw std::invalid_argument("signal '" + signal +
                                    "': mean alignment needs an empirical or parametric model");
      }
      score.z = mean_align(*cm, key->second, pred->second);
    }
    values[signal] = score.z;
    out.per_signal[signal] = score;
    ++stream;
  }
  out.z_final = fuse(values, setup.weights);

  bool any_quantile = false;
  bool any_mean = false;
  for (const auto& [name, w] : setup.weights.weights()) {
    if (w == 0.0) continue;
    const auto it = out.per_signal.find(name);
    if (it == out.per_signal.end()) continue;
    (it->second.method == AlignMethod::quantile ? any_quantile : any_mean) = true;
  }
  out.mixed_methods = any_quantile && any_mean;
  return out;
}

}  // namespace alignpxtr
