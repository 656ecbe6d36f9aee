#include "alignpxtr/simulator.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "alignpxtr/random.hpp"
#include "alignpxtr/special.hpp"
#include "alignpxtr/table.hpp"

namespace alignpxtr {

std::string_view to_string(SignalKind k) {
  return k == SignalKind::continuous ? "continuous" : "binary";
}

SignalKind parse_signal_kind(std::string_view s) {
  if (s == "continuous") return SignalKind::continuous;
  if (s == "binary") return SignalKind::binary;
  throw std::invalid_argument("unknown signal kind '" + std::string(s) + "'");
}

double BucketParameter::at(const BiasKey& key) const {
  if (const auto it = overrides.find(key); it != overrides.end()) return it->second;
  double v = base;
  for (std::size_t d = 0; d < effects.size() && d < key.indices.size(); ++d) {
    if (!effects[d].empty()) v += effects[d].at(key.indices[d]);
  }
  return v;
}

namespace {

void validate_parameter(const BucketParameter& p, const BiasSpec& spec, const std::string& field) {
  if (!std::isfinite(p.base)) throw std::invalid_argument(field + ".base must be finite");
  if (!p.effects.empty() && p.effects.size() != spec.dimension_count()) {
    throw std::invalid_argument(field + ".effects must have one entry per bias dimension");
  }
  for (std::size_t d = 0; d < p.effects.size(); ++d) {
    if (!p.effects[d].empty() && p.effects[d].size() != spec.dimensions()[d].bucket_count()) {
      throw std::invalid_argument(field + ".effects[" + std::to_string(d) +
                                  "] must have one value per bucket");
    }
    for (double e : p.effects[d]) {
      if (!std::isfinite(e)) throw std::invalid_argument(field + ".effects must be finite");
    }
  }
  for (const auto& [key, value] : p.overrides) {
    try {
      spec.validate_key(key);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(field + ".overrides: " + e.what());
    }
    if (!std::isfinite(value)) throw std::invalid_argument(field + ".overrides must be finite");
  }
}

}  // namespace

void SimConfig::validate() const {
  if (n_records < 1) throw std::invalid_argument("simulator.n_records must be positive");
  if (spec.dimension_count() == 0) throw std::invalid_argument("bias_dimensions must not be empty");
  if (bucket_probabilities.size() != spec.dimension_count()) {
    throw std::invalid_argument("simulator.bucket_probabilities needs one vector per dimension");
  }
  for (std::size_t d = 0; d < spec.dimension_count(); ++d) {
    const auto& probs = bucket_probabilities[d];
    const std::string field = "simulator.bucket_probabilities[" + std::to_string(d) + "]";
    if (probs.size() != spec.dimensions()[d].bucket_count()) {
      throw std::invalid_argument(field + " must have one entry per bucket");
    }
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument(field + " must be non-negative");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument(field + " must sum to 1");
  }
  if (!(feature_noise >= 0.0) || !std::isfinite(feature_noise)) {
    throw std::invalid_argument("simulator.feature_noise must be non-negative");
  }
  if (signals.empty()) throw std::invalid_argument("signals must not be empty");
  std::set<std::string> names;
  for (const auto& s : signals) {
    const std::string field = "signals." + s.name;
    if (s.name.empty()) throw std::invalid_argument("signals: empty signal name");
    if (!names.insert(s.name).second) {
      throw std::invalid_argument("signals: '" + s.name + "' defined more than once");
    }
    validate_parameter(s.location, spec, field + ".generator.location");
    if (!(s.noise_scale >= 0.0) || !std::isfinite(s.noise_scale)) {
      throw std::invalid_argument(field + ".generator.noise_scale must be non-negative");
    }
    if (s.kind == SignalKind::continuous) {
      validate_parameter(s.scale, spec, field + ".generator.scale");
      if (spec.bucket_combinations() <= 1'000'000) {
        for (const auto& key : spec.all_keys()) {
          if (!(s.scale.at(key) > 0.0)) {
            throw std::invalid_argument(field + ".generator.scale must be positive in bucket " +
                                        key.to_string());
          }
        }
      }
    } else if (!(s.slope >= 0.0) || !std::isfinite(s.slope)) {
      throw std::invalid_argument(field + ".generator.slope must be non-negative");
    }
  }
}

double latent_behavior(const SignalGenerator& signal, const BiasKey& key, double z) {
  const double q = normal_quantile(z);
  if (signal.kind == SignalKind::continuous) {
    return std::exp(signal.location.at(key) + signal.scale.at(key) * q);
  }
  return normal_cdf(signal.location.at(key) + signal.slope * q);
}

std::vector<GroundTruthRecord> generate_shard(const SimConfig& config, std::uint64_t shard,
                                              std::uint64_t first_id, std::size_t count) {
  config.validate();
  Rng rng(derive_seed(config.seed, shard));
  const auto& dims = config.spec.dimensions();
  std::vector<GroundTruthRecord> records;
  records.reserve(count);
  std::vector<double> raw(dims.size());
  for (std::size_t i = 0; i < count; ++i) {
    GroundTruthRecord r;
    r.id = first_id + i;
    r.z_true = rng.uniform_open();
    std::vector<std::size_t> buckets(dims.size());
    for (std::size_t d = 0; d < dims.size(); ++d) {
      buckets[d] = rng.categorical(config.bucket_probabilities[d]);
      if (dims[d].is_categorical()) {
        raw[d] = static_cast<double>(buckets[d]);
      } else {
        const auto [lo, hi] = config.spec.bucket_interval(d, buckets[d]);
        double v = lo + rng.uniform() * (hi - lo);
        if (v >= hi) v = std::nextafter(hi, lo);
        raw[d] = v;
      }
    }
    r.bias_values = raw;
    r.key = discretize(raw, config.spec);
    r.interest_feature = normal_quantile(r.z_true) + config.feature_noise * rng.normal();
    for (const auto& signal : config.signals) {
      const double x = latent_behavior(signal, r.key, r.z_true);
      r.latent[signal.name] = x;
      if (signal.kind == SignalKind::continuous) {
        r.observed[signal.name] = x * std::exp(signal.noise_scale * rng.normal());
      } else {
        r.observed[signal.name] = rng.uniform() < x ? 1.0 : 0.0;
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<GroundTruthRecord> generate(const SimConfig& config) {
  return generate_shard(config, 0, 0, config.n_records);
}

std::size_t export_records(const std::vector<GroundTruthRecord>& records, const SimConfig& config,
                           const std::filesystem::path& path) {
  std::vector<std::string> header{std::string(columns::kId), std::string(columns::kZTrue)};
  for (const auto& dim : config.spec.dimensions()) header.push_back(columns::bias(dim.name));
  header.emplace_back(columns::kInterestFeature);
  for (const auto& s : config.signals) header.push_back(columns::observed(s.name));
  for (const auto& s : config.signals) header.push_back(columns::latent(s.name));

  Table table(header);
  for (const auto& r : records) {
    std::vector<std::string> cells;
    cells.reserve(header.size());
    cells.push_back(std::to_string(r.id));
    cells.push_back(format_double(r.z_true));
    for (double v : r.bias_values) cells.push_back(format_double(v));
    cells.push_back(format_double(r.interest_feature));
    for (const auto& s : config.signals) cells.push_back(format_double(r.observed.at(s.name)));
    for (const auto& s : config.signals) cells.push_back(format_double(r.latent.at(s.name)));
    table.append_row(std::move(cells));
  }
  table.write(path);
  return records.size();
}

std::vector<GroundTruthRecord> import_records(const SimConfig& config,
                                              const std::filesystem::path& path) {
  const Table table = Table::read(path);
  const auto ids = table.text_column(columns::kId);
  const auto z = table.numeric_column(columns::kZTrue);
  std::vector<std::vector<double>> bias;
  for (const auto& dim : config.spec.dimensions()) {
    bias.push_back(table.numeric_column(columns::bias(dim.name)));
  }
  const auto feature = table.numeric_column(columns::kInterestFeature);
  std::map<std::string, std::vector<double>> observed;
  std::map<std::string, std::vector<double>> latent;
  for (const auto& s : config.signals) {
    observed[s.name] = table.numeric_column(columns::observed(s.name));
    latent[s.name] = table.numeric_column(columns::latent(s.name));
  }

  std::vector<GroundTruthRecord> records(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto& r = records[i];
    r.id = std::stoull(ids[i]);
    r.z_true = z[i];
    for (const auto& column : bias) r.bias_values.push_back(column[i]);
    r.key = discretize(r.bias_values, config.spec);
    r.interest_feature = feature[i];
    for (const auto& s : config.signals) {
      r.observed[s.name] = observed[s.name][i];
      r.latent[s.name] = latent[s.name][i];
    }
  }
  return records;
}

}  // namespace alignpxtr
