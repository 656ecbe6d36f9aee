#include "alignpxtr/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "alignpxtr/dataset.hpp"
#include "alignpxtr/exact_sum.hpp"
#include "alignpxtr/random.hpp"
#include "alignpxtr/serialization.hpp"
#include "alignpxtr/table.hpp"

namespace alignpxtr {

using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";

std::string predictor_file(const std::string& signal) { return signal + ".predictor.json"; }
std::string conditional_file(const std::string& signal) { return signal + ".conditional.json"; }

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw std::runtime_error("cannot create directory " + parent.string() + ": " + ec.message());
}

std::vector<BiasKey> read_keys(const Table& table, const BiasSpec& spec) {
  std::vector<std::vector<double>> columns;
  for (const auto& dim : spec.dimensions()) columns.push_back(table.numeric_column(columns::bias(dim.name)));
  std::vector<BiasKey> keys(table.rows());
  std::vector<double> readings(columns.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t d = 0; d < columns.size(); ++d) readings[d] = columns[d][r];
    try {
      keys[r] = discretize(readings, spec);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("data row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return keys;
}

std::vector<double> predictor_features(const SignalSetup& signal, const BiasSpec& spec,
                                       double interest, const BiasKey& key) {
  std::vector<double> f{interest};
  if (signal.predictor.include_bias_features) {
    const auto enc = spec.encode(key);
    f.insert(f.end(), enc.begin(), enc.end());
  }
  return f;
}

std::size_t predictor_dimension(const SignalSetup& signal, const BiasSpec& spec) {
  return 1 + (signal.predictor.include_bias_features ? spec.encoded_size() : 0);
}

/// Predicted x per row for one signal.
std::vector<double> predictions(const SignalSetup& signal, const BiasSpec& spec, const Table& table,
                                std::span<const BiasKey> keys,
                                const std::optional<PredictorModel>& model) {
  switch (signal.predictor.mode) {
    case PredictorMode::oracle: {
      const auto column = columns::latent(signal.name());
      if (!table.has_column(column)) {
        throw std::invalid_argument("signal '" + signal.name() + "': oracle predictor needs column '" +
                                    column + "'");
      }
      return table.numeric_column(column);
    }
    case PredictorMode::column: {
      const auto column = columns::predicted(signal.name());
      if (!table.has_column(column)) {
        throw std::invalid_argument("signal '" + signal.name() + "': data has no column '" + column + "'");
      }
      return table.numeric_column(column);
    }
    case PredictorMode::trained: break;
  }
  if (!model) throw std::logic_error("trained predictor missing");
  const auto interest = table.numeric_column(columns::kInterestFeature);
  std::vector<double> x(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    x[r] = model->predict(predictor_features(signal, spec, interest[r], keys[r]));
  }
  return x;
}

PredictorModel train_predictor(const ExperimentConfig& config, std::size_t index, const Table& table,
                               std::span<const BiasKey> keys) {
  const auto& signal = config.signals[index];
  const auto observed_column = columns::observed(signal.name());
  if (!table.has_column(observed_column)) {
    throw std::invalid_argument("signal '" + signal.name() + "': data has no column '" +
                                observed_column + "'");
  }
  const auto s = table.numeric_column(observed_column);
  const auto interest = table.numeric_column(columns::kInterestFeature);
  const std::size_t dim = predictor_dimension(signal, config.spec);
  std::vector<std::vector<double>> rows(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    rows[r] = predictor_features(signal, config.spec, interest[r], keys[r]);
  }

  // Bias encodings carry raw midpoints (tens of seconds), so gradient descent
  // runs on standardized columns and the result is folded back afterwards.
  std::vector<double> centre(dim, 0.0);
  std::vector<double> spread(dim, 1.0);
  for (std::size_t j = 0; j < dim; ++j) {
    ExactSum sum;
    for (const auto& row : rows) sum.add(row[j]);
    centre[j] = sum.value() / static_cast<double>(rows.size());
    ExactSum sq;
    for (const auto& row : rows) sq.add((row[j] - centre[j]) * (row[j] - centre[j]));
    const double sd = std::sqrt(sq.value() / static_cast<double>(rows.size()));
    if (sd > 0.0) spread[j] = sd;
  }
  Dataset data(dim);
  std::vector<double> scaled(dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < dim; ++j) scaled[j] = (rows[r][j] - centre[j]) / spread[j];
    data.add(scaled, s[r]);
  }
  TrainConfig train = signal.predictor.train;
  train.seed = derive_seed(config.seed, seed_stream::kTrainBase + 2 * index);
  const auto fitted = signal.generator.kind == SignalKind::binary
                          ? train_classifier(data, train, signal.name())
                          : train_regressor(data, train, signal.name());
  std::vector<double> weights(dim);
  double intercept = fitted.intercept();
  for (std::size_t j = 0; j < dim; ++j) {
    weights[j] = fitted.weights()[j] / spread[j];
    intercept -= weights[j] * centre[j];
  }
  PredictorModel model(std::move(weights), intercept, fitted.link(), signal.name());
  model.set_training_losses({fitted.training_losses().begin(), fitted.training_losses().end()});
  return model;
}

SignalModel fit_conditional(const ExperimentConfig& config, std::size_t index,
                            std::span<const Observation> obs) {
  const auto& signal = config.signals[index];
  const auto options = signal.conddist.options(signal.name());
  switch (signal.conddist.estimator) {
    case ConddistEstimator::empirical:
      return ConditionalModel::fit_empirical(obs, config.spec, options);
    case ConddistEstimator::parametric:
      return ConditionalModel::fit_parametric(obs, config.spec, signal.conddist.family, options);
    case ConddistEstimator::quantile_regression: break;
  }
  QuantileRegConfig qr = signal.conddist.quantile_regression;
  qr.seed = derive_seed(config.seed, seed_stream::kTrainBase + 2 * index + 1);
  std::vector<Observation> transformed(obs.begin(), obs.end());
  for (auto& o : transformed) o.x = apply_transform(signal.conddist.transform, o.x);
  return fit_quantile_regression(transformed, config.spec, signal.conddist.tau_levels, qr);
}

json signal_model_to_json(const SignalModel& model) {
  return std::visit([](const auto& m) { return m.to_json(); }, model);
}

SignalModel load_signal_model(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  if (doc.value("artifact", std::string()) == "quantile_regression_model") {
    return QuantileRegModel::from_json(doc);
  }
  return ConditionalModel::from_json(doc);
}

std::vector<Observation> observations(std::span<const double> x, std::span<const BiasKey> keys) {
  std::vector<Observation> obs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) obs[i] = {x[i], keys[i]};
  return obs;
}

std::string csv_bucket(const BiasKey& key) {
  auto s = key.to_string();
  std::replace(s.begin(), s.end(), ',', ':');
  return s;
}

json mi_to_json(const MiEstimate& m) {
  return {{"nats", m.nats},
          {"noise_floor_nats", m.noise_floor_nats},
          {"n_bins_z", m.n_bins_z},
          {"n_samples", m.n_samples}};
}

json ks_to_json(const KsResult& k) {
  return {{"d_statistic", k.d_statistic},
          {"n_samples", k.n_samples},
          {"threshold", k.threshold},
          {"passed", k.passed()}};
}

json stats_to_json(const std::map<BiasKey, BucketStat>& stats) {
  json out = json::object();
  for (const auto& [key, s] : stats) {
    out[key.to_string()] = {{"count", s.count}, {"mean", s.mean}, {"std", s.std}};
  }
  return out;
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

bool mixed_methods(const ExperimentConfig& config) {
  bool any_quantile = false;
  bool any_mean = false;
  for (const auto& [name, w] : config.weights) {
    if (w == 0.0) continue;
    (config.signal(name).alignment.method == AlignMethod::quantile ? any_quantile : any_mean) = true;
  }
  return any_quantile && any_mean;
}

std::optional<double> spearman_or_none(std::span<const double> a, std::span<const double> b) {
  try {
    return rank_correlation(a, b);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
  json doc;
  doc["format_version"] = kArtifactFormatVersion;
  doc["artifact"] = "experiment_report";
  doc["config_fingerprint"] = config_fingerprint;
  doc["seed"] = seed;
  doc["data_fingerprint"] = data_fingerprint;
  doc["artifact_fingerprints"] = artifact_fingerprints;
  doc["recovery_available"] = recovery_available;
  doc["mixed_methods"] = mixed_methods;
  doc["fused"] = {{"mi", mi_to_json(mi_fused)}, {"spearman", optional_to_json(spearman_fused)}};
  json sigs = json::array();
  for (const auto& s : signals) {
    json ks_buckets = json::object();
    for (const auto& [key, k] : s.ks_buckets) ks_buckets[key.to_string()] = ks_to_json(k);
    sigs.push_back({{"signal", s.signal},
                    {"method", to_string(s.method)},
                    {"mi_raw", mi_to_json(s.mi_raw)},
                    {"mi_aligned", mi_to_json(s.mi_aligned)},
                    {"ks_global", s.ks_global ? ks_to_json(*s.ks_global) : json(nullptr)},
                    {"ks_buckets", std::move(ks_buckets)},
                    {"spearman_raw", optional_to_json(s.spearman_raw)},
                    {"spearman_aligned", optional_to_json(s.spearman_aligned)},
                    {"raw_stats", stats_to_json(s.raw_stats)},
                    {"aligned_stats", stats_to_json(s.aligned_stats)}});
  }
  doc["signals"] = std::move(sigs);
  return doc;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "metric,signal,method,bucket,value\n";
  const auto row = [&](std::string_view metric, std::string_view signal, std::string_view method,
                       std::string_view bucket, double value) {
    out << metric << ',' << signal << ',' << method << ',' << bucket << ',' << format_double(value)
        << '\n';
  };
  for (const auto& s : signals) {
    const auto method = to_string(s.method);
    row("mi_raw", s.signal, method, "", s.mi_raw.nats);
    row("mi_raw_noise_floor", s.signal, method, "", s.mi_raw.noise_floor_nats);
    row("mi_aligned", s.signal, method, "", s.mi_aligned.nats);
    row("mi_aligned_noise_floor", s.signal, method, "", s.mi_aligned.noise_floor_nats);
    if (s.ks_global) row("ks_global", s.signal, method, "", s.ks_global->d_statistic);
    for (const auto& [key, k] : s.ks_buckets) row("ks_bucket", s.signal, method, csv_bucket(key), k.d_statistic);
    if (s.spearman_raw) row("spearman_raw", s.signal, method, "", *s.spearman_raw);
    if (s.spearman_aligned) row("spearman_aligned", s.signal, method, "", *s.spearman_aligned);
    for (const auto& [key, st] : s.raw_stats) {
      row("bucket_count", s.signal, method, csv_bucket(key), static_cast<double>(st.count));
      row("bucket_mean_raw", s.signal, method, csv_bucket(key), st.mean);
      row("bucket_std_raw", s.signal, method, csv_bucket(key), st.std);
    }
    for (const auto& [key, st] : s.aligned_stats) {
      row("bucket_mean_aligned", s.signal, method, csv_bucket(key), st.mean);
      row("bucket_std_aligned", s.signal, method, csv_bucket(key), st.std);
    }
  }
  const std::string_view fused_method = mixed_methods ? "mixed" : "fused";
  row("mi_aligned", "z_final", fused_method, "", mi_fused.nats);
  row("mi_aligned_noise_floor", "z_final", fused_method, "", mi_fused.noise_floor_nats);
  if (spearman_fused) row("spearman_aligned", "z_final", fused_method, "", *spearman_fused);
  return out.str();
}

void ExperimentReport::write(const std::filesystem::path& json_path) const {
  ensure_parent(json_path);
  write_json_file(json_path, to_json());
  auto csv_path = json_path;
  csv_path.replace_extension(".csv");
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());
  out << to_csv();
}

std::size_t cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out,
                         std::ostream& log) {
  config.validate();
  const auto records = generate(config.sim_config());
  ensure_parent(out);
  const auto n = export_records(records, config.sim_config(), out);
  log << "simulate: wrote " << n << " rows\n";
  return n;
}

FitSummary cmd_fit(const ExperimentConfig& config, const std::filesystem::path& data,
                   const std::filesystem::path& model_dir, std::ostream& log) {
  config.validate();
  const Table table = Table::read(data);
  const auto keys = read_keys(table, config.spec);
  if (table.rows() == 0) throw std::invalid_argument("fit: data has no rows");

  std::error_code ec;
  std::filesystem::create_directories(model_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + model_dir.string() + ": " + ec.message());

  FitSummary summary;
  json manifest;
  manifest["format_version"] = kArtifactFormatVersion;
  manifest["artifact"] = "model_manifest";
  manifest["config_fingerprint"] = config.fingerprint();
  manifest["bias_spec_fingerprint"] = config.bias_spec_fingerprint();
  json manifest_signals = json::object();
  std::map<std::string, std::string> fingerprints;

  for (std::size_t i = 0; i < config.signals.size(); ++i) {
    const auto& signal = config.signals[i];
    FitSummary::SignalFit fit;
    fit.signal = signal.name();
    json entry;
    entry["predictor_mode"] = to_string(signal.predictor.mode);
    entry["estimator"] = to_string(signal.conddist.estimator);

    std::optional<PredictorModel> predictor;
    if (signal.predictor.mode == PredictorMode::trained) {
      predictor = train_predictor(config, i, table, keys);
      const auto path = model_dir / predictor_file(signal.name());
      write_json_file(path, predictor->to_json());
      fingerprints[predictor_file(signal.name())] = file_sha256(path);
      entry["predictor"] = predictor_file(signal.name());
      fit.predictor_trained = true;
      const auto losses = predictor->training_losses();
      summary.lines.push_back("signal " + signal.name() + ": step 1 trained, loss " +
                              format_double(losses.front()) + " -> " + format_double(losses.back()));
    } else {
      entry["predictor"] = nullptr;
      summary.lines.push_back("signal " + signal.name() + ": step 1 skipped (" +
                              std::string(to_string(signal.predictor.mode)) + " predictor)");
    }

    const auto x = predictions(signal, config.spec, table, keys, predictor);
    const auto obs = observations(x, keys);
    const auto model = fit_conditional(config, i, obs);
    const auto path = model_dir / conditional_file(signal.name());
    write_json_file(path, signal_model_to_json(model));
    fingerprints[conditional_file(signal.name())] = file_sha256(path);
    entry["conditional"] = conditional_file(signal.name());
    manifest_signals[signal.name()] = std::move(entry);

    for (const auto& key : keys) ++fit.bucket_counts[key];
    for (const auto& key : config.spec.all_keys()) {
      const auto it = fit.bucket_counts.find(key);
      const std::uint64_t n = it == fit.bucket_counts.end() ? 0 : it->second;
      summary.lines.push_back("signal " + signal.name() + ": bucket " + key.to_string() + " n=" +
                              std::to_string(n));
      if (n < signal.conddist.min_bucket_count &&
          signal.conddist.estimator != ConddistEstimator::quantile_regression) {
        fit.sparse_buckets.push_back(key);
        summary.lines.push_back("warning: signal " + signal.name() + ": bucket " + key.to_string() +
                                " has " + std::to_string(n) + " samples (< min_bucket_count " +
                                std::to_string(signal.conddist.min_bucket_count) +
                                "), shrunk toward the fallback");
      }
    }
    summary.signals.push_back(std::move(fit));
  }
  manifest["signals"] = std::move(manifest_signals);
  manifest["artifact_fingerprints"] = fingerprints;
  write_json_file(model_dir / kManifest, manifest);
  for (const auto& line : summary.lines) log << "fit: " << line << '\n';
  return summary;
}

std::size_t cmd_transform(const ExperimentConfig& config, const std::filesystem::path& data,
                          const std::filesystem::path& model_dir,
                          const std::filesystem::path& out, std::ostream& log) {
  config.validate();
  const auto manifest = read_json_file(model_dir / kManifest);
  check_artifact(manifest, "model_manifest");
  if (require_field(manifest, "bias_spec_fingerprint").get<std::string>() !=
      config.bias_spec_fingerprint()) {
    throw std::invalid_argument("transform: model artifacts were fitted for a different bias spec");
  }

  PipelineSetup setup;
  setup.weights = config.fusion_weights();
  setup.tie = config.tie_mode();
  std::map<std::string, std::optional<PredictorModel>> predictors;
  const auto& entries = require_field(manifest, "signals");
  for (const auto& signal : config.signals) {
    if (!entries.contains(signal.name())) {
      throw std::invalid_argument("transform: no fitted model for signal '" + signal.name() + "'");
    }
    const auto& entry = entries[signal.name()];
    auto model = load_signal_model(model_dir / require_field(entry, "conditional").get<std::string>());
    if (const auto* cm = std::get_if<ConditionalModel>(&model); cm && !(cm->spec() == config.spec)) {
      throw std::invalid_argument("transform: model for '" + signal.name() +
                                  "' was fitted for a different bias spec");
    }
    if (const auto* qr = std::get_if<QuantileRegModel>(&model);
        qr && !(qr->encoding() && *qr->encoding() == config.spec)) {
      throw std::invalid_argument("transform: model for '" + signal.name() +
                                  "' was fitted for a different bias spec");
    }
    setup.models.emplace(signal.name(), std::move(model));
    setup.alignment[signal.name()] = signal.alignment;
    auto& predictor = predictors[signal.name()];
    if (signal.predictor.mode == PredictorMode::trained) {
      if (entry.value("predictor", json(nullptr)).is_null()) {
        throw std::invalid_argument("transform: no trained predictor for '" + signal.name() + "'");
      }
      predictor = PredictorModel::from_json(
          read_json_file(model_dir / entry["predictor"].get<std::string>()));
    }
  }

  Table table = Table::read(data);
  const auto keys = read_keys(table, config.spec);
  std::map<std::string, std::vector<double>> x;
  for (const auto& signal : config.signals) {
    x[signal.name()] = predictions(signal, config.spec, table, keys, predictors[signal.name()]);
  }
  std::vector<std::uint64_t> row_ids(table.rows());
  if (table.has_column(columns::kId)) {
    const auto ids = table.text_column(columns::kId);
    for (std::size_t r = 0; r < table.rows(); ++r) row_ids[r] = std::stoull(ids[r]);
  } else {
    for (std::size_t r = 0; r < table.rows(); ++r) row_ids[r] = r;
  }

  std::map<std::string, std::vector<double>> z;
  std::vector<double> z_final(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    ScoreRequest request;
    for (const auto& signal : config.signals) {
      request.predictions[signal.name()] = x[signal.name()][r];
      request.keys[signal.name()] = keys[r];
    }
    const auto scored = score_pipeline(request, setup, row_ids[r]);
    for (const auto& [name, s] : scored.per_signal) z[name].push_back(s.z);
    z_final[r] = scored.z_final;
  }

  for (const auto& signal : config.signals) {
    if (signal.predictor.mode != PredictorMode::column) {
      table.set_numeric_column(columns::predicted(signal.name()), x[signal.name()]);
    }
  }
  for (const auto& signal : config.signals) {
    table.set_numeric_column(columns::aligned(signal.name()), z[signal.name()]);
  }
  table.set_numeric_column(std::string(columns::kZFinal), z_final);
  ensure_parent(out);
  table.write(out);
  log << "transform: wrote " << table.rows() << " rows\n";
  return table.rows();
}

ExperimentReport cmd_evaluate(const ExperimentConfig& config,
                              const std::filesystem::path& transformed,
                              const std::filesystem::path& report_out,
                              const std::optional<std::filesystem::path>& model_dir,
                              std::ostream& log) {
  config.validate();
  const Table table = Table::read(transformed);
  const auto keys = read_keys(table, config.spec);
  for (const auto& signal : config.signals) {
    for (const auto& column : {columns::predicted(signal.name()), columns::aligned(signal.name())}) {
      if (!table.has_column(column)) {
        throw std::invalid_argument("evaluate: data has no column '" + column + "'");
      }
    }
  }
  if (!table.has_column(columns::kZFinal)) {
    throw std::invalid_argument("evaluate: data has no column 'z_final'");
  }

  ExperimentReport report;
  report.config_fingerprint = config.fingerprint();
  report.seed = config.seed;
  report.data_fingerprint = file_sha256(transformed);
  if (model_dir) {
    const auto manifest = read_json_file(*model_dir / kManifest);
    report.artifact_fingerprints =
        require_field(manifest, "artifact_fingerprints").get<std::map<std::string, std::string>>();
    report.artifact_fingerprints[kManifest] = file_sha256(*model_dir / kManifest);
  }
  report.mixed_methods = mixed_methods(config);

  std::optional<std::vector<double>> z_true;
  if (table.has_column(columns::kZTrue)) z_true = table.numeric_column(columns::kZTrue);
  report.recovery_available = z_true.has_value();

  MiOptions mi;
  mi.n_bins_z = config.evaluation.mi_bins;
  mi.permutations = config.evaluation.permutations;
  mi.seed = derive_seed(config.seed, seed_stream::kPermutation);

  for (const auto& signal : config.signals) {
    SignalReport s;
    s.signal = signal.name();
    s.method = signal.alignment.method;
    const auto x = table.numeric_column(columns::predicted(signal.name()));
    const auto z = table.numeric_column(columns::aligned(signal.name()));
    s.mi_raw = mutual_information_binned(x, keys, mi);
    s.mi_aligned = mutual_information_binned(z, keys, mi);
    if (s.method == AlignMethod::quantile) {
      s.ks_global = ks_against_target(z, signal.alignment.target, config.evaluation.ks_global_threshold);
      std::map<BiasKey, std::vector<double>> by_bucket;
      for (std::size_t r = 0; r < z.size(); ++r) by_bucket[keys[r]].push_back(z[r]);
      for (const auto& [key, values] : by_bucket) {
        if (values.size() < config.evaluation.min_bucket_for_ks) continue;
        s.ks_buckets[key] =
            ks_against_target(values, signal.alignment.target, config.evaluation.ks_bucket_threshold);
      }
    }
    if (z_true) {
      s.spearman_raw = spearman_or_none(x, *z_true);
      s.spearman_aligned = spearman_or_none(z, *z_true);
    }
    s.raw_stats = bucket_stats(x, keys);
    s.aligned_stats = bucket_stats(z, keys);
    log << "evaluate: " << s.signal << " mi_raw=" << format_double(s.mi_raw.nats)
        << " mi_aligned=" << format_double(s.mi_aligned.nats)
        << " floor=" << format_double(s.mi_aligned.noise_floor_nats) << '\n';
    report.signals.push_back(std::move(s));
  }
  const auto z_final = table.numeric_column(columns::kZFinal);
  report.mi_fused = mutual_information_binned(z_final, keys, mi);
  if (z_true) report.spearman_fused = spearman_or_none(z_final, *z_true);
  if (!z_true) log << "evaluate: z_true absent, recovery metrics unavailable\n";
  report.write(report_out);
  return report;
}

ExperimentReport cmd_pipeline(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                              std::ostream& log) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + out_dir.string() + ": " + ec.message());
  const auto data = out_dir / "data.csv";
  const auto models = out_dir / "models";
  const auto transformed = out_dir / "transformed.csv";
  cmd_simulate(config, data, log);
  cmd_fit(config, data, models, log);
  cmd_transform(config, data, models, transformed, log);
  return cmd_evaluate(config, transformed, out_dir / "report.json", models, log);
}

}  // namespace alignpxtr
