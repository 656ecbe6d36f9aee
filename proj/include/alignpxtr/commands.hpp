#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "alignpxtr/config.hpp"
#include "alignpxtr/metrics.hpp"

namespace alignpxtr {

struct SignalReport {
  std::string signal;
  AlignMethod method = AlignMethod::quantile;
  MiEstimate mi_raw;
  MiEstimate mi_aligned;
  /// Quantile-mapped signals only; measured against the signal's target.
  std::optional<KsResult> ks_global;
  std::map<BiasKey, KsResult> ks_buckets;
  std::optional<double> spearman_raw;
  std::optional<double> spearman_aligned;
  std::map<BiasKey, BucketStat> raw_stats;
  std::map<BiasKey, BucketStat> aligned_stats;
};

struct ExperimentReport {
  std::string config_fingerprint;
  std::uint64_t seed = 0;
  std::string data_fingerprint;
  std::map<std::string, std::string> artifact_fingerprints;
  std::vector<SignalReport> signals;
  MiEstimate mi_fused;
  std::optional<double> spearman_fused;
  bool recovery_available = false;
  bool mixed_methods = false;

  nlohmann::json to_json() const;
  /// Flat rows: metric, signal, method, bucket, value.
  std::string to_csv() const;
  void write(const std::filesystem::path& json_path) const;
};

struct FitSummary {
  struct SignalFit {
    std::string signal;
    bool predictor_trained = false;
    std::map<BiasKey, std::uint64_t> bucket_counts;
    std::vector<BiasKey> sparse_buckets;
  };
  std::vector<SignalFit> signals;
  std::vector<std::string> lines;
};

/// Simulates config.n_records records into `out`; returns the row count.
std::size_t cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out,
                         std::ostream& log);

/// Step 1 (predictor) and Step 2 (conditional model) per signal. Writes
/// <signal>.predictor.json, <signal>.conditional.json and manifest.json.
FitSummary cmd_fit(const ExperimentConfig& config, const std::filesystem::path& data,
                   const std::filesystem::path& model_dir, std::ostream& log);

/// Appends x.<signal>, z.<signal> and z_final columns. Artifacts fitted for a
/// different BiasSpec are rejected before anything is written.
std::size_t cmd_transform(const ExperimentConfig& config, const std::filesystem::path& data,
                          const std::filesystem::path& model_dir,
                          const std::filesystem::path& out, std::ostream& log);

/// Writes `report_out` (JSON) and the same path with a .csv extension.
ExperimentReport cmd_evaluate(const ExperimentConfig& config,
                              const std::filesystem::path& transformed,
                              const std::filesystem::path& report_out,
                              const std::optional<std::filesystem::path>& model_dir,
                              std::ostream& log);

/// simulate -> fit -> transform -> evaluate inside `out_dir`.
ExperimentReport cmd_pipeline(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                              std::ostream& log);

}  // namespace alignpxtr
