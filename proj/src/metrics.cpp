#include "alignpxtr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "alignpxtr/exact_sum.hpp"
#include "alignpxtr/random.hpp"

namespace alignpxtr {

std::vector<std::size_t> equal_mass_bins(std::span<const double> z, std::size_t n_bins) {
  if (n_bins < 1) throw std::invalid_argument("equal_mass_bins: need at least one bin");
  const std::size_t n = z.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
  std::vector<std::size_t> bins(n);
  std::size_t group_start = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && z[order[r]] != z[order[r - 1]]) group_start = r;
    bins[order[r]] = std::min(n_bins - 1, group_start * n_bins / n);
  }
  return bins;
}

namespace {

std::vector<std::size_t> compact(std::span<const std::size_t> labels, std::size_t& distinct) {
  std::vector<std::size_t> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), labels[i]) -
                                      sorted.begin());
  }
  distinct = sorted.size();
  return out;
}

double mi_compact(std::span<const std::size_t> a, std::size_t na, std::span<const std::size_t> b,
                  std::size_t nb) {
  const std::size_t n = a.size();
  std::vector<double> joint(na * nb, 0.0);
  std::vector<double> pa(na, 0.0);
  std::vector<double> pb(nb, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[a[i] * nb + b[i]] += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  const double nd = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double c = joint[i * nb + j];
      if (c > 0.0) mi += c / nd * std::log(c * nd / (pa[i] * pb[j]));
    }
  }
  return std::max(mi, 0.0);
}

}  // namespace

double plugin_mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mutual information: length mismatch");
  if (a.empty()) throw std::invalid_argument("mutual information: empty input");
  std::size_t na = 0;
  std::size_t nb = 0;
  const auto ca = compact(a, na);
  const auto cb = compact(b, nb);
  return mi_compact(ca, na, cb, nb);
}

MiEstimate mutual_information_binned(std::span<const double> z,
                                     std::span<const std::size_t> labels,
                                     const MiOptions& options) {
  if (z.size() != labels.size()) throw std::invalid_argument("mutual information: length mismatch");
  if (options.n_bins_z < 2) throw std::invalid_argument("mutual information: n_bins_z must be >= 2");
  if (z.size() < options.n_bins_z) {
    throw std::invalid_argument("mutual information: fewer samples than bins");
  }
  for (double v : z) {
    if (std::isnan(v)) throw std::invalid_argument("mutual information: NaN sample");
  }
  const auto bins = equal_mass_bins(z, options.n_bins_z);
  std::size_t nl = 0;
  auto compacted = compact(labels, nl);

  MiEstimate out;
  out.n_bins_z = options.n_bins_z;
  out.n_samples = z.size();
  out.nats = mi_compact(bins, options.n_bins_z, compacted, nl);
  double floor = 0.0;
  for (std::size_t p = 0; p < options.permutations; ++p) {
    Rng rng(derive_seed(options.seed, p));
    rng.shuffle(std::span<std::size_t>(compacted));
    floor += mi_compact(bins, options.n_bins_z, compacted, nl);
  }
  if (options.permutations > 0) out.noise_floor_nats = floor / static_cast<double>(options.permutations);
  return out;
}

MiEstimate mutual_information_binned(std::span<const double> z, std::span<const BiasKey> keys,
                                     const MiOptions& options) {
  std::vector<BiasKey> sorted(keys.begin(), keys.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::size_t> labels(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    labels[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
                                         sorted.begin());
  }
  return mutual_information_binned(z, labels, options);
}

KsResult ks_uniformity(std::span<const double> z, double threshold) {
  if (z.empty()) throw std::invalid_argument("ks: empty input");
  std::vector<double> sorted(z.begin(), z.end());
  for (double v : sorted) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ks: value outside [0, 1]");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - sorted[i];
    const double below = sorted[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return {d, sorted.size(), threshold};
}

KsResult ks_against_target(std::span<const double> z, const TargetDistribution& target,
                           double threshold) {
  validate_target(target);
  std::vector<double> u(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) throw std::invalid_argument("ks: non-finite value");
    u[i] = target_cdf(target, z[i]);
  }
  return ks_uniformity(u, threshold);
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("rank_correlation: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("rank_correlation: need at least 2 samples");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) throw std::invalid_argument("rank_correlation: NaN");
  }
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw std::domain_error("rank_correlation: constant input has no rank variance");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::map<BiasKey, BucketStat> bucket_stats(std::span<const double> z, std::span<const BiasKey> keys) {
  if (z.size() != keys.size()) throw std::invalid_argument("bucket_stats: length mismatch");
  std::map<BiasKey, ExactSum> sums;
  std::map<BiasKey, std::size_t> counts;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sums[keys[i]].add(z[i]);
    ++counts[keys[i]];
  }
  std::map<BiasKey, BucketStat> out;
  std::map<BiasKey, ExactSum> squares;
  for (const auto& [key, sum] : sums) {
    out[key] = {counts[key], sum.value() / static_cast<double>(counts[key]), 0.0};
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - out[keys[i]].mean;
    squares[keys[i]].add(d * d);
  }
  for (auto& [key, stat] : out) {
    stat.std = std::sqrt(squares[key].value() / static_cast<double>(stat.count));
  }
  return out;
}

double chi_square_uniform(std::span<const double> z, std::size_t n_bins) {
  if (z.empty() || n_bins < 2) throw std::invalid_argument("chi_square_uniform: bad input");
  std::vector<double> counts(n_bins, 0.0);
  for (double v : z) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("chi_square_uniform: value outside [0, 1]");
    const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(v * static_cast<double>(n_bins)));
    counts[bin] += 1.0;
  }
  const double expected = static_cast<double>(z.size()) / static_cast<double>(n_bins);
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

double chi_square_critical(std::size_t dof, double alpha) {
  if (dof < 1 || !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("chi_square_critical: bad arguments");
  }
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

}  // namespace alignpxtr
