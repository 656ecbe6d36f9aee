#include "alignpxtr/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>

#include <openssl/evp.h>

#include "alignpxtr/random.hpp"
#include "alignpxtr/serialization.hpp"

namespace alignpxtr {

using nlohmann::json;

std::string_view to_string(PredictorMode m) {
  switch (m) {
    case PredictorMode::oracle: return "oracle";
    case PredictorMode::trained: return "trained";
    case PredictorMode::column: return "column";
  }
  return "oracle";
}

PredictorMode parse_predictor_mode(std::string_view s) {
  if (s == "oracle") return PredictorMode::oracle;
  if (s == "trained") return PredictorMode::trained;
  if (s == "column") return PredictorMode::column;
  throw std::invalid_argument("unknown predictor mode '" + std::string(s) + "'");
}

std::string_view to_string(ConddistEstimator e) {
  switch (e) {
    case ConddistEstimator::empirical: return "empirical";
    case ConddistEstimator::parametric: return "parametric";
    case ConddistEstimator::quantile_regression: return "quantile_regression";
  }
  return "empirical";
}

ConddistEstimator parse_conddist_estimator(std::string_view s) {
  if (s == "empirical") return ConddistEstimator::empirical;
  if (s == "parametric") return ConddistEstimator::parametric;
  if (s == "quantile_regression") return ConddistEstimator::quantile_regression;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

ConditionalOptions ConddistSetup::options(const std::string& signal) const {
  ConditionalOptions o;
  o.signal_name = signal;
  o.grid_size = grid_size;
  o.min_bucket_count = min_bucket_count;
  o.shrinkage_strength = shrinkage_strength;
  o.transform = transform;
  return o;
}

namespace {

std::vector<double> default_tau_levels() {
  std::vector<double> taus;
  for (int i = 1; i <= 19; ++i) taus.push_back(0.05 * i);
  return taus;
}

template <typename F>
void with_field(const std::string& field, F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(field + ": " + e.what());
  } catch (const json::exception& e) {
    throw std::invalid_argument(field + ": " + e.what());
  }
}

template <typename T>
T field_or(const json& obj, const std::string& section, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  T out = fallback;
  with_field(section.empty() ? std::string(key) : section + "." + key, [&] { out = obj[key].get<T>(); });
  return out;
}

json parameter_to_json(const BucketParameter& p, const BiasSpec& spec) {
  json doc;
  doc["base"] = p.base;
  json effects = json::object();
  for (std::size_t d = 0; d < p.effects.size(); ++d) {
    if (!p.effects[d].empty()) effects[spec.dimensions()[d].name] = p.effects[d];
  }
  doc["effects"] = std::move(effects);
  json overrides = json::object();
  for (const auto& [key, v] : p.overrides) overrides[key.to_string()] = v;
  doc["overrides"] = std::move(overrides);
  return doc;
}

BucketParameter parameter_from_json(const json& doc, const BiasSpec& spec, const std::string& field) {
  BucketParameter p;
  if (doc.is_number()) {
    p.base = doc.get<double>();
    return p;
  }
  if (!doc.is_object()) throw std::invalid_argument(field + ": expected a number or an object");
  p.base = field_or(doc, field, "base", 0.0);
  if (const auto it = doc.find("effects"); it != doc.end()) {
    p.effects.assign(spec.dimension_count(), {});
    for (const auto& [name, values] : it->items()) {
      bool found = false;
      for (std::size_t d = 0; d < spec.dimension_count(); ++d) {
        if (spec.dimensions()[d].name == name) {
          p.effects[d] = values.get<std::vector<double>>();
          found = true;
        }
      }
      if (!found) throw std::invalid_argument(field + ".effects: unknown dimension '" + name + "'");
    }
  }
  if (const auto it = doc.find("overrides"); it != doc.end()) {
    for (const auto& [key, value] : it->items()) {
      with_field(field + ".overrides", [&] { p.overrides[BiasKey::parse(key)] = value.get<double>(); });
    }
  }
  return p;
}

json train_to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"l2_penalty", t.l2_penalty}};
}

TrainConfig train_from_json(const json& doc, const std::string& field) {
  TrainConfig t;
  t.learning_rate = field_or(doc, field, "learning_rate", t.learning_rate);
  t.epochs = field_or(doc, field, "epochs", t.epochs);
  t.batch_size = field_or(doc, field, "batch_size", t.batch_size);
  t.l2_penalty = field_or(doc, field, "l2_penalty", t.l2_penalty);
  return t;
}

json signal_to_json(const SignalSetup& s, const BiasSpec& spec) {
  json g;
  g["location"] = parameter_to_json(s.generator.location, spec);
  g["noise_scale"] = s.generator.noise_scale;
  if (s.generator.kind == SignalKind::continuous) {
    g["scale"] = parameter_to_json(s.generator.scale, spec);
  } else {
    g["slope"] = s.generator.slope;
  }

  json c;
  c["estimator"] = to_string(s.conddist.estimator);
  c["grid_size"] = s.conddist.grid_size;
  c["min_bucket_count"] = s.conddist.min_bucket_count;
  c["shrinkage_strength"] = s.conddist.shrinkage_strength;
  c["transform_space"] = to_string(s.conddist.transform);
  c["family"] = to_string(s.conddist.family);
  c["tau_levels"] = s.conddist.tau_levels;
  c["quantile_regression"] = {{"learning_rate", s.conddist.quantile_regression.learning_rate},
                              {"epochs", s.conddist.quantile_regression.epochs},
                              {"batch_size", s.conddist.quantile_regression.batch_size}};

  return {{"name", s.name()},
          {"kind", to_string(s.generator.kind)},
          {"generator", std::move(g)},
          {"predictor",
           {{"mode", to_string(s.predictor.mode)},
            {"train", train_to_json(s.predictor.train)},
            {"include_bias_features", s.predictor.include_bias_features}}},
          {"conddist", std::move(c)},
          {"alignment",
           {{"method", to_string(s.alignment.method)},
            {"target", target_to_json(s.alignment.target)}}}};
}

SignalSetup signal_from_json(const json& doc, const BiasSpec& spec) {
  SignalSetup s;
  with_field("signals", [&] { s.generator.name = require_field(doc, "name").get<std::string>(); });
  const std::string field = "signals." + s.generator.name;
  with_field(field + ".kind", [&] {
    s.generator.kind = parse_signal_kind(require_field(doc, "kind").get<std::string>());
  });

  const json empty = json::object();
  const json& g = doc.contains("generator") ? doc["generator"] : empty;
  if (g.contains("location")) {
    s.generator.location = parameter_from_json(g["location"], spec, field + ".generator.location");
  }
  if (g.contains("scale")) {
    s.generator.scale = parameter_from_json(g["scale"], spec, field + ".generator.scale");
  } else {
    s.generator.scale.base = 1.0;
  }
  s.generator.slope = field_or(g, field + ".generator", "slope", 1.0);
  s.generator.noise_scale = field_or(g, field + ".generator", "noise_scale", 0.0);

  const json& p = doc.contains("predictor") ? doc["predictor"] : empty;
  with_field(field + ".predictor.mode",
             [&] { s.predictor.mode = parse_predictor_mode(p.value("mode", "oracle")); });
  if (p.contains("train")) s.predictor.train = train_from_json(p["train"], field + ".predictor.train");
  s.predictor.include_bias_features = field_or(p, field + ".predictor", "include_bias_features", true);

  const json& c = doc.contains("conddist") ? doc["conddist"] : empty;
  with_field(field + ".conddist", [&] {
    s.conddist.estimator = parse_conddist_estimator(c.value("estimator", "empirical"));
    s.conddist.transform = parse_transform_space(c.value("transform_space", "identity"));
    s.conddist.family = parse_family(c.value("family", "gaussian"));
  });
  s.conddist.grid_size = field_or(c, field + ".conddist", "grid_size", s.conddist.grid_size);
  s.conddist.min_bucket_count = field_or(c, field + ".conddist", "min_bucket_count", s.conddist.min_bucket_count);
  s.conddist.shrinkage_strength = field_or(c, field + ".conddist", "shrinkage_strength", s.conddist.shrinkage_strength);
  s.conddist.tau_levels = field_or(c, field + ".conddist", "tau_levels", default_tau_levels());
  if (c.contains("quantile_regression")) {
    const auto& q = c["quantile_regression"];
    auto& qr = s.conddist.quantile_regression;
    qr.learning_rate = field_or(q, field + ".conddist.quantile_regression", "learning_rate", qr.learning_rate);
    qr.epochs = field_or(q, field + ".conddist.quantile_regression", "epochs", qr.epochs);
    qr.batch_size = field_or(q, field + ".conddist.quantile_regression", "batch_size", qr.batch_size);
  }

  const json& a = doc.contains("alignment") ? doc["alignment"] : empty;
  with_field(field + ".alignment", [&] {
    s.alignment.method = parse_align_method(a.value("method", "quantile"));
    if (a.contains("target")) s.alignment.target = target_from_json(a["target"]);
  });
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  sim_config().validate();
  for (const auto& s : signals) {
    const std::string field = "signals." + s.name();
    if (s.predictor.mode == PredictorMode::trained) {
      with_field(field + ".predictor", [&] { s.predictor.train.validate(); });
    }
    with_field(field + ".conddist", [&] {
      s.conddist.options(s.name()).validate();
      if (s.conddist.estimator == ConddistEstimator::quantile_regression) {
        s.conddist.quantile_regression.validate();
        if (s.conddist.tau_levels.empty()) throw std::invalid_argument("tau_levels must not be empty");
        for (std::size_t i = 0; i < s.conddist.tau_levels.size(); ++i) {
          const double t = s.conddist.tau_levels[i];
          if (!(t > 0.0 && t < 1.0) || (i > 0 && !(s.conddist.tau_levels[i - 1] < t))) {
            throw std::invalid_argument("tau_levels must be strictly increasing inside (0, 1)");
          }
        }
      }
    });
    with_field(field + ".alignment", [&] {
      validate_target(s.alignment.target);
      if (s.alignment.method == AlignMethod::mean &&
          s.conddist.estimator == ConddistEstimator::quantile_regression) {
        throw std::invalid_argument("mean alignment needs an empirical or parametric estimator");
      }
    });
  }
  for (const auto& [name, w] : weights) {
    bool known = false;
    for (const auto& s : signals) known = known || s.name() == name;
    if (!known) throw std::invalid_argument("fusion.weights." + name + ": unknown signal");
  }
  with_field("fusion.weights", [&] { (void)fusion_weights(); });
  if (evaluation.mi_bins < 2) throw std::invalid_argument("evaluation.mi_bins must be at least 2");
  if (!(evaluation.ks_bucket_threshold > 0.0) || !(evaluation.ks_global_threshold > 0.0)) {
    throw std::invalid_argument("evaluation: KS thresholds must be positive");
  }
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig sim;
  sim.n_records = n_records;
  sim.seed = derive_seed(seed, seed_stream::kSimulator);
  sim.spec = spec;
  sim.bucket_probabilities = bucket_probabilities;
  sim.feature_noise = feature_noise;
  for (const auto& s : signals) sim.signals.push_back(s.generator);
  return sim;
}

FusionWeights ExperimentConfig::fusion_weights() const { return FusionWeights(weights); }

TieMode ExperimentConfig::tie_mode() const {
  if (tie == TieSetting::randomized) return Randomized{derive_seed(seed, seed_stream::kTies)};
  return Deterministic{};
}

const SignalSetup& ExperimentConfig::signal(std::string_view name) const {
  for (const auto& s : signals) {
    if (s.name() == name) return s;
  }
  throw std::invalid_argument("unknown signal '" + std::string(name) + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
  json doc;
  doc["format_version"] = kArtifactFormatVersion;
  doc["seed"] = seed;
  doc["output_directory"] = output_directory.generic_string();
  doc["bias_dimensions"] = bias_spec_to_json(spec);
  doc["simulator"] = {{"n_records", n_records},
                      {"bucket_probabilities", bucket_probabilities},
                      {"feature_noise", feature_noise}};
  json sigs = json::array();
  for (const auto& s : signals) sigs.push_back(signal_to_json(s, spec));
  doc["signals"] = std::move(sigs);
  doc["fusion"] = {{"weights", weights},
                   {"tie_mode", tie == TieSetting::randomized ? "randomized" : "deterministic"}};
  doc["evaluation"] = {{"mi_bins", evaluation.mi_bins},
                       {"permutations", evaluation.permutations},
                       {"ks_bucket_threshold", evaluation.ks_bucket_threshold},
                       {"ks_global_threshold", evaluation.ks_global_threshold},
                       {"min_bucket_for_ks", evaluation.min_bucket_for_ks}};
  return doc;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  try {
    if (doc.contains("format_version") && doc["format_version"].get<int>() != kArtifactFormatVersion) {
      throw std::invalid_argument("format_version: unsupported version");
    }
    c.seed = field_or(doc, "", "seed", std::uint64_t{0});
    c.output_directory = field_or(doc, "", "output_directory", std::string("alignpxtr_out"));
    with_field("bias_dimensions", [&] { c.spec = bias_spec_from_json(require_field(doc, "bias_dimensions")); });

    const json empty = json::object();
    const json& sim = doc.contains("simulator") ? doc["simulator"] : empty;
    c.n_records = field_or(sim, "simulator", "n_records", c.n_records);
    c.feature_noise = field_or(sim, "simulator", "feature_noise", c.feature_noise);
    if (sim.contains("bucket_probabilities")) {
      with_field("simulator.bucket_probabilities", [&] {
        c.bucket_probabilities = sim["bucket_probabilities"].get<std::vector<std::vector<double>>>();
      });
    } else {
      for (const auto& dim : c.spec.dimensions()) {
        const auto k = dim.bucket_count();
        c.bucket_probabilities.emplace_back(k, 1.0 / static_cast<double>(k));
      }
    }

    for (const auto& s : require_field(doc, "signals")) c.signals.push_back(signal_from_json(s, c.spec));

    const json& fusion = doc.contains("fusion") ? doc["fusion"] : empty;
    if (fusion.contains("weights")) {
      with_field("fusion.weights", [&] { c.weights = fusion["weights"].get<std::map<std::string, double>>(); });
    } else {
      for (const auto& s : c.signals) c.weights[s.name()] = 1.0;
    }
    const auto tie = field_or(fusion, "fusion", "tie_mode", std::string("deterministic"));
    if (tie == "deterministic") {
      c.tie = TieSetting::deterministic;
    } else if (tie == "randomized") {
      c.tie = TieSetting::randomized;
    } else {
      throw std::invalid_argument("fusion.tie_mode: unknown mode '" + tie + "'");
    }

    const json& ev = doc.contains("evaluation") ? doc["evaluation"] : empty;
    c.evaluation.mi_bins = field_or(ev, "evaluation", "mi_bins", c.evaluation.mi_bins);
    c.evaluation.permutations = field_or(ev, "evaluation", "permutations", c.evaluation.permutations);
    c.evaluation.ks_bucket_threshold = field_or(ev, "evaluation", "ks_bucket_threshold", c.evaluation.ks_bucket_threshold);
    c.evaluation.ks_global_threshold = field_or(ev, "evaluation", "ks_global_threshold", c.evaluation.ks_global_threshold);
    c.evaluation.min_bucket_for_ks = field_or(ev, "evaluation", "min_bucket_for_ks", c.evaluation.min_bucket_for_ks);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

std::string ExperimentConfig::fingerprint() const {
  auto doc = to_json();
  doc.erase("seed");
  doc.erase("output_directory");
  return sha256_hex(doc.dump());
}

std::string ExperimentConfig::bias_spec_fingerprint() const {
  return sha256_hex(bias_spec_to_json(spec).dump());
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.seed = 20240601;
  c.spec = BiasSpec({{"duration", Continuous{{15.0, 30.0, 60.0}}}, {"category", Categorical{5}}});
  c.n_records = 200'000;
  c.bucket_probabilities = {{0.25, 0.3, 0.25, 0.2}, {0.3, 0.25, 0.2, 0.15, 0.1}};
  c.feature_noise = 0.5;

  SignalSetup watch;
  watch.generator.name = "watch_time";
  watch.generator.kind = SignalKind::continuous;
  watch.generator.location = {2.0, {{0.0, 0.6, 1.2, 1.8}, {-0.3, -0.15, 0.0, 0.15, 0.3}}, {}};
  watch.generator.scale = {0.8, {{0.0, 0.05, 0.1, 0.15}, {}}, {}};
  watch.generator.noise_scale = 0.3;
  watch.conddist.shrinkage_strength = 0.0;
  watch.conddist.tau_levels = default_tau_levels();

  SignalSetup like;
  like.generator.name = "like";
  like.generator.kind = SignalKind::binary;
  like.generator.location = {-1.0, {{0.6, 0.3, 0.0, -0.3}, {-0.4, -0.2, 0.0, 0.2, 0.4}}, {}};
  like.generator.scale = {1.0, {}, {}};
  like.generator.slope = 1.0;
  like.conddist.shrinkage_strength = 0.0;
  like.conddist.tau_levels = default_tau_levels();

  c.signals = {watch, like};
  c.weights = {{"watch_time", 0.5}, {"like", 0.5}};
  return c;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace alignpxtr
