#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "alignpxtr/align.hpp"
#include "alignpxtr/bias.hpp"

namespace alignpxtr {

struct MiEstimate {
  double nats = 0.0;
  std::size_t n_bins_z = 0;
  std::size_t n_samples = 0;
  /// Mean of the same estimator over seeded permutations of the labels.
  double noise_floor_nats = 0.0;
};

struct MiOptions {
  std::size_t n_bins_z = 20;
  std::size_t permutations = 8;
  std::uint64_t seed = 0;
};

/// Plug-in mutual information (nats) between z, cut into equal-mass bins,
/// and a discrete label.
MiEstimate mutual_information_binned(std::span<const double> z,
                                     std::span<const std::size_t> labels,
                                     const MiOptions& options = {});
MiEstimate mutual_information_binned(std::span<const double> z, std::span<const BiasKey> keys,
                                     const MiOptions& options = {});

/// Equal-mass bin index of every value; ties always share a bin.
std::vector<std::size_t> equal_mass_bins(std::span<const double> z, std::size_t n_bins);

/// Plug-in MI of two discrete label vectors.
double plugin_mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct KsResult {
  double d_statistic = 0.0;
  std::size_t n_samples = 0;
  double threshold = 0.0;
  bool passed() const { return d_statistic <= threshold; }
};

/// Exact sup |F_n(u) - u| over the sorted sample. Values must lie in [0, 1].
KsResult ks_uniformity(std::span<const double> z, double threshold = 1.0);
KsResult ks_against_target(std::span<const double> z, const TargetDistribution& target,
                           double threshold = 1.0);

/// Spearman rho (Pearson on midranks). Throws std::domain_error when either
/// input is constant.
double rank_correlation(std::span<const double> a, std::span<const double> b);
std::vector<double> midranks(std::span<const double> values);

struct BucketStat {
  std::size_t count = 0;
  double mean = 0.0;
  /// Population standard deviation.
  double std = 0.0;
};

std::map<BiasKey, BucketStat> bucket_stats(std::span<const double> z, std::span<const BiasKey> keys);

/// Pearson chi-square statistic of values in [0, 1] against equal bins.
double chi_square_uniform(std::span<const double> z, std::size_t n_bins);
/// Upper critical value of the chi-square law at significance alpha.
double chi_square_critical(std::size_t dof, double alpha);

}  // namespace alignpxtr
