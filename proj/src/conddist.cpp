#include "alignpxtr/conddist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "alignpxtr/serialization.hpp"
#include "alignpxtr/special.hpp"

namespace alignpxtr {

using nlohmann::json;

std::string_view to_string(TransformSpace t) {
  return t == TransformSpace::identity ? "identity" : "log1p";
}
std::string_view to_string(EstimatorKind k) {
  return k == EstimatorKind::empirical ? "empirical" : "parametric";
}
std::string_view to_string(Family f) { return f == Family::gaussian ? "gaussian" : "lognormal"; }

TransformSpace parse_transform_space(std::string_view s) {
  if (s == "identity") return TransformSpace::identity;
  if (s == "log1p") return TransformSpace::log1p;
  throw std::invalid_argument("unknown transform_space '" + std::string(s) + "'");
}
EstimatorKind parse_estimator_kind(std::string_view s) {
  if (s == "empirical") return EstimatorKind::empirical;
  if (s == "parametric") return EstimatorKind::parametric;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}
Family parse_family(std::string_view s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "lognormal") return Family::lognormal;
  throw std::invalid_argument("unknown family '" + std::string(s) + "'");
}

double apply_transform(TransformSpace t, double x) {
  return t == TransformSpace::identity ? x : std::log1p(x);
}
double invert_transform(TransformSpace t, double v) {
  return t == TransformSpace::identity ? v : std::expm1(v);
}

double hazen_quantile(std::span<const double> sorted, double tau) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("hazen_quantile: no values");
  const double h = static_cast<double>(n) * tau + 0.5;
  if (h <= 1.0) return sorted.front();
  if (h >= static_cast<double>(n)) return sorted.back();
  const auto i = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(i);
  const double a = sorted[i - 1];
  const double b = sorted[i];
  return frac == 0.0 ? a : a + frac * (b - a);
}

namespace {

/// Piecewise-linear CDF through knots (v_k, (k + 0.5)/m); a run of equal
/// knots is an atom reported with its mass and midpoint.
CdfValue knot_cdf(std::span<const double> v, double x) {
  const std::size_t m = v.size();
  const auto lo = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
  const double md = static_cast<double>(m);
  if (lo < hi) {
    return {static_cast<double>(lo + hi) / (2.0 * md), static_cast<double>(lo) / md,
            static_cast<double>(hi) / md};
  }
  if (lo == 0) return {0.0, 0.0, 0.0};
  if (lo == m) return {1.0, 1.0, 1.0};
  const double frac = (x - v[lo - 1]) / (v[lo] - v[lo - 1]);
  const double t = (static_cast<double>(lo) - 0.5 + frac) / md;
  return {t, t, t};
}

/// Right-continuous CDF of the piecewise-linear quantile function through
/// (levels[k], values[k]); used to mix two compressed summaries.
double quantile_function_cdf(std::span<const double> levels, std::span<const double> values,
                             double x) {
  if (x < values.front()) return 0.0;
  if (x >= values.back()) return 1.0;
  const auto k =
      static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), x) - values.begin()) -
      1;
  const double frac = (x - values[k]) / (values[k + 1] - values[k]);
  return levels[k] + frac * (levels[k + 1] - levels[k]);
}

struct QuantileKnots {
  std::vector<double> levels;
  std::vector<double> values;
};

QuantileKnots quantile_knots(const EmpiricalSummary& s) {
  QuantileKnots q;
  const auto base = s.samples().empty() ? s.grid() : s.samples();
  const double m = static_cast<double>(base.size());
  q.levels.push_back(0.0);
  q.values.push_back(s.min());
  for (std::size_t k = 0; k < base.size(); ++k) {
    q.levels.push_back((static_cast<double>(k) + 0.5) / m);
    q.values.push_back(base[k]);
  }
  q.levels.push_back(1.0);
  q.values.push_back(s.max());
  return q;
}

/// inf{x : cdf(x) >= tau} on [lo, hi] by bisection over doubles.
template <typename Cdf>
double invert_monotone(const Cdf& cdf, double tau, double lo, double hi) {
  if (cdf(lo) >= tau) return lo;
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) >= tau) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<double> build_grid(std::span<const double> sorted, std::size_t grid_size) {
  std::vector<double> grid(grid_size);
  const double g = static_cast<double>(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    grid[j] = hazen_quantile(sorted, (static_cast<double>(j) + 0.5) / g);
  }
  return grid;
}

double clamp_probability(double p, std::uint64_t n) {
  const double edge = 0.5 / static_cast<double>(n);
  return std::clamp(p, edge, 1.0 - edge);
}

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("inv_cdf: tau must lie in [0, 1]");
  }
}

}  // namespace

EmpiricalSummary EmpiricalSummary::fit(std::vector<double> values, std::size_t grid_size) {
  if (grid_size == 0) throw std::invalid_argument("grid_size must be positive");
  EmpiricalSummary s;
  if (values.empty()) return s;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalSummary: non-finite value");
    s.sum_.add(v);
  }
  std::sort(values.begin(), values.end());
  s.count_ = values.size();
  s.min_ = values.front();
  s.max_ = values.back();
  s.grid_ = build_grid(values, grid_size);
  if (values.size() <= grid_size) s.samples_ = std::move(values);
  return s;
}

EmpiricalSummary EmpiricalSummary::merge(const EmpiricalSummary& a, const EmpiricalSummary& b,
                                         std::size_t grid_size) {
  if (a.count_ == 0) return b;
  if (b.count_ == 0) return a;
  EmpiricalSummary out;
  out.count_ = a.count_ + b.count_;
  out.sum_ = a.sum_;
  out.sum_.merge(b.sum_);
  out.min_ = std::min(a.min_, b.min_);
  out.max_ = std::max(a.max_, b.max_);

  if (out.count_ <= grid_size) {
    // Both sides still hold their raw samples, so the merge is exact.
    std::vector<double> pooled(out.count_);
    std::merge(a.samples_.begin(), a.samples_.end(), b.samples_.begin(), b.samples_.end(),
               pooled.begin());
    out.grid_ = build_grid(pooled, grid_size);
    out.samples_ = std::move(pooled);
    return out;
  }

  // Count-weighted mixture of the two quantile functions, re-gridded.
  const auto ka = quantile_knots(a);
  const auto kb = quantile_knots(b);
  const double n = static_cast<double>(out.count_);
  const double wa = static_cast<double>(a.count_) / n;
  const double wb = static_cast<double>(b.count_) / n;
  const auto mixture = [&](double x) {
    return wa * quantile_function_cdf(ka.levels, ka.values, x) +
           wb * quantile_function_cdf(kb.levels, kb.values, x);
  };
  out.grid_.resize(grid_size);
  const double g = static_cast<double>(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double tau = (static_cast<double>(j) + 0.5) / g;
    double q = invert_monotone(mixture, tau, out.min_, out.max_);
    if (j > 0) q = std::max(q, out.grid_[j - 1]);
    out.grid_[j] = q;
  }
  return out;
}

EmpiricalSummary EmpiricalSummary::restore(std::vector<double> grid, std::vector<double> samples,
                                           std::uint64_t count, ExactSum sum, double min,
                                           double max) {
  EmpiricalSummary s;
  if (count == 0) {
    if (!grid.empty() || !samples.empty()) {
      throw std::invalid_argument("empirical summary: data present with count 0");
    }
    return s;
  }
  if (grid.empty()) throw std::invalid_argument("empirical summary: empty quantile grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("empirical summary: quantile grid not non-decreasing");
  }
  if (!(min <= grid.front() && grid.back() <= max)) {
    throw std::invalid_argument("empirical summary: grid outside [sample_min, sample_max]");
  }
  const bool retained = count <= grid.size();
  if (retained != (samples.size() == count) || (!retained && !samples.empty())) {
    throw std::invalid_argument("empirical summary: retained samples inconsistent with count");
  }
  if (!std::is_sorted(samples.begin(), samples.end())) {
    throw std::invalid_argument("empirical summary: samples not sorted");
  }
  s.grid_ = std::move(grid);
  s.samples_ = std::move(samples);
  s.count_ = count;
  s.sum_ = std::move(sum);
  s.min_ = min;
  s.max_ = max;
  return s;
}

double EmpiricalSummary::mean() const {
  return count_ == 0 ? 0.0 : sum_.value() / static_cast<double>(count_);
}

std::span<const double> EmpiricalSummary::knots() const {
  return samples_.empty() ? std::span<const double>(grid_) : std::span<const double>(samples_);
}

CdfValue EmpiricalSummary::cdf(double x) const {
  if (count_ == 0) throw std::logic_error("cdf of an empty summary");
  CdfValue c = knot_cdf(knots(), x);
  const bool atom = c.left < c.right;
  c.mid = clamp_probability(c.mid, count_);
  if (!atom) c.left = c.right = c.mid;
  return c;
}

double EmpiricalSummary::quantile(double tau) const {
  if (count_ == 0) throw std::logic_error("quantile of an empty summary");
  check_tau(tau);
  if (!samples_.empty()) return hazen_quantile(samples_, tau);
  const double g = static_cast<double>(grid_.size());
  const double first = 0.5 / g;
  const double last = 1.0 - 0.5 / g;
  if (tau <= first) {
    return tau == first ? grid_.front() : min_ + (tau / first) * (grid_.front() - min_);
  }
  if (tau >= last) {
    return tau == last ? grid_.back()
                       : grid_.back() + ((tau - last) / (1.0 - last)) * (max_ - grid_.back());
  }
  return hazen_quantile(grid_, tau);
}

// ---------------------------------------------------------------------------

CdfValue parametric_cdf(const ParametricParams& p, double x) {
  double t = x;
  if (p.family == Family::lognormal) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    t = std::log(x);
  }
  if (p.scale > 0.0) {
    const double c = normal_cdf((t - p.location) / p.scale);
    return {c, c, c};
  }
  if (t < p.location) return {0.0, 0.0, 0.0};
  if (t > p.location) return {1.0, 1.0, 1.0};
  return {0.5, 0.0, 1.0};
}

double parametric_quantile(const ParametricParams& p, double tau) {
  check_tau(tau);
  double t = p.location;
  if (p.scale > 0.0) t = p.location + p.scale * normal_quantile(tau);
  return p.family == Family::lognormal ? std::exp(t) : t;
}

ParametricSummary ParametricSummary::fit(std::span<const double> values, Family family) {
  ParametricSummary s(family);
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("ParametricSummary: non-finite value");
    double t = v;
    if (family == Family::lognormal) {
      if (v <= 0.0) throw std::invalid_argument("lognormal fit requires positive values");
      t = std::log(v);
    }
    s.sum_values_.add(v);
    s.sum_t_.add(t);
    s.sum_t2_.add(t * t);
  }
  s.count_ = values.size();
  return s;
}

ParametricSummary ParametricSummary::merge(const ParametricSummary& a, const ParametricSummary& b) {
  if (a.family_ != b.family_) throw std::invalid_argument("merging different families");
  ParametricSummary s(a.family_);
  s.count_ = a.count_ + b.count_;
  s.sum_values_ = a.sum_values_;
  s.sum_values_.merge(b.sum_values_);
  s.sum_t_ = a.sum_t_;
  s.sum_t_.merge(b.sum_t_);
  s.sum_t2_ = a.sum_t2_;
  s.sum_t2_.merge(b.sum_t2_);
  return s;
}

ParametricSummary ParametricSummary::restore(Family family, std::uint64_t count,
                                             ExactSum sum_values, ExactSum sum_t,
                                             ExactSum sum_t2) {
  ParametricSummary s(family);
  s.count_ = count;
  s.sum_values_ = std::move(sum_values);
  s.sum_t_ = std::move(sum_t);
  s.sum_t2_ = std::move(sum_t2);
  return s;
}

double ParametricSummary::location() const {
  return count_ == 0 ? 0.0 : sum_t_.value() / static_cast<double>(count_);
}

double ParametricSummary::scale() const {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  const double mu = location();
  const double var = sum_t2_.value() / n - mu * mu;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

double ParametricSummary::mean() const {
  return count_ == 0 ? 0.0 : sum_values_.value() / static_cast<double>(count_);
}

std::uint64_t summary_count(const DistributionSummary& s) {
  return std::visit([](const auto& v) { return v.count(); }, s);
}

// ---------------------------------------------------------------------------

void ConditionalOptions::validate() const {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
  if (min_bucket_count < 1) throw std::invalid_argument("min_bucket_count must be positive");
  if (!(shrinkage_strength >= 0.0) || !std::isfinite(shrinkage_strength)) {
    throw std::invalid_argument("shrinkage_strength must be a non-negative real");
  }
}

ConditionalModel::ConditionalModel(BiasSpec spec, EstimatorKind kind, Family family,
                                   ConditionalOptions options, DistributionSummary fallback)
    : spec_(std::move(spec)),
      kind_(kind),
      family_(family),
      options_(std::move(options)),
      fallback_(std::move(fallback)) {}

namespace {

std::map<BiasKey, std::vector<double>> partition(std::span<const Observation> records,
                                                 const BiasSpec& spec, TransformSpace transform,
                                                 std::vector<double>& all) {
  if (records.empty()) throw std::invalid_argument("fit: empty record stream");
  std::map<BiasKey, std::vector<double>> groups;
  all.reserve(records.size());
  for (const auto& r : records) {
    spec.validate_key(r.key);
    const double v = apply_transform(transform, r.x);
    if (!std::isfinite(v)) {
      throw std::invalid_argument("fit: non-finite value in transform space (x = " +
                                  std::to_string(r.x) + ")");
    }
    groups[r.key].push_back(v);
    all.push_back(v);
  }
  return groups;
}

}  // namespace

ConditionalModel ConditionalModel::fit_empirical(std::span<const Observation> records,
                                                 const BiasSpec& spec,
                                                 const ConditionalOptions& options) {
  options.validate();
  std::vector<double> all;
  auto groups = partition(records, spec, options.transform, all);
  ConditionalModel model(spec, EstimatorKind::empirical, Family::gaussian, options,
                         EmpiricalSummary::fit(std::move(all), options.grid_size));
  for (auto& [key, values] : groups) {
    model.buckets_.emplace(key, EmpiricalSummary::fit(std::move(values), options.grid_size));
  }
  return model;
}

ConditionalModel ConditionalModel::fit_parametric(std::span<const Observation> records,
                                                  const BiasSpec& spec, Family family,
                                                  const ConditionalOptions& options) {
  options.validate();
  std::vector<double> all;
  auto groups = partition(records, spec, options.transform, all);
  ConditionalModel model(spec, EstimatorKind::parametric, family, options,
                         ParametricSummary::fit(all, family));
  for (auto& [key, values] : groups) {
    model.buckets_.emplace(key, ParametricSummary::fit(values, family));
  }
  return model;
}

ConditionalModel ConditionalModel::empty(const BiasSpec& spec, EstimatorKind kind, Family family,
                                         const ConditionalOptions& options) {
  options.validate();
  DistributionSummary fallback = kind == EstimatorKind::empirical
                                     ? DistributionSummary(EmpiricalSummary{})
                                     : DistributionSummary(ParametricSummary(family));
  return ConditionalModel(spec, kind, family, options, std::move(fallback));
}

void ConditionalModel::require_data() const {
  if (total_count() == 0) throw std::logic_error("conditional model holds no data");
}

const DistributionSummary* ConditionalModel::find(const BiasKey& key) const {
  spec_.validate_key(key);
  const auto it = buckets_.find(key);
  if (it == buckets_.end() || summary_count(it->second) == 0) return nullptr;
  return &it->second;
}

std::uint64_t ConditionalModel::count(const BiasKey& key) const {
  const auto* s = find(key);
  return s == nullptr ? 0 : summary_count(*s);
}

double ConditionalModel::weight_of(std::uint64_t n) const {
  const double nd = static_cast<double>(n);
  return nd / (nd + options_.shrinkage_strength);
}

ParametricParams ConditionalModel::effective_params(const ParametricSummary* bucket) const {
  const auto& fb = std::get<ParametricSummary>(fallback_);
  ParametricParams fallback{family_, fb.location(), fb.scale()};
  if (bucket == nullptr) return fallback;
  ParametricParams p{family_, bucket->location(), bucket->scale()};
  if (p.scale == 0.0) p.scale = fallback.scale;
  const double k = options_.shrinkage_strength;
  if (bucket->count() < options_.min_bucket_count && k > 0.0) {
    const double n = static_cast<double>(bucket->count());
    p.location = (n * p.location + k * fallback.location) / (n + k);
    p.scale = (n * p.scale + k * fallback.scale) / (n + k);
  }
  return p;
}

CdfValue ConditionalModel::cdf_value(const BiasKey& key, double x) const {
  require_data();
  if (std::isnan(x)) throw std::invalid_argument("cdf: x is NaN");
  const double v = to_model_space(x);
  if (std::isnan(v)) throw std::invalid_argument("cdf: x outside the transform domain");
  const auto* bucket = find(key);

  if (kind_ == EstimatorKind::parametric) {
    const auto* b = bucket ? &std::get<ParametricSummary>(*bucket) : nullptr;
    return parametric_cdf(effective_params(b), v);
  }

  const auto& fb = std::get<EmpiricalSummary>(fallback_);
  if (bucket == nullptr) return fb.cdf(v);
  const auto& b = std::get<EmpiricalSummary>(*bucket);
  const double k = options_.shrinkage_strength;
  if (b.count() >= options_.min_bucket_count || k == 0.0) return b.cdf(v);

  const CdfValue cb = b.cdf(v);
  const CdfValue cf = fb.cdf(v);
  const double n = static_cast<double>(b.count());
  const auto blend = [&](double p, double q) { return (n * p + k * q) / (n + k); };
  return {blend(cb.mid, cf.mid), blend(cb.left, cf.left), blend(cb.right, cf.right)};
}

double ConditionalModel::cdf(const BiasKey& key, double x) const { return cdf_value(key, x).mid; }

double ConditionalModel::inv_cdf(const BiasKey& key, double tau) const {
  require_data();
  check_tau(tau);
  const auto* bucket = find(key);

  if (kind_ == EstimatorKind::parametric) {
    const auto* b = bucket ? &std::get<ParametricSummary>(*bucket) : nullptr;
    return from_model_space(parametric_quantile(effective_params(b), tau));
  }

  const auto& fb = std::get<EmpiricalSummary>(fallback_);
  if (bucket == nullptr) return from_model_space(fb.quantile(tau));
  const auto& b = std::get<EmpiricalSummary>(*bucket);
  const double k = options_.shrinkage_strength;
  if (b.count() >= options_.min_bucket_count || k == 0.0) {
    return from_model_space(b.quantile(tau));
  }

  // Sparse bucket: invert the blended CDF numerically.
  const double lo = std::min(b.min(), fb.min());
  const double hi = std::max(b.max(), fb.max());
  if (tau == 0.0) return from_model_space(lo);
  if (tau == 1.0) return from_model_space(hi);
  const double n = static_cast<double>(b.count());
  const auto blended = [&](double v) { return (n * b.cdf(v).mid + k * fb.cdf(v).mid) / (n + k); };
  return from_model_space(invert_monotone(blended, tau, lo, hi));
}

double ConditionalModel::cond_mean(const BiasKey& key) const {
  require_data();
  const auto mean_of = [](const DistributionSummary& s) {
    return std::visit([](const auto& v) { return v.mean(); }, s);
  };
  const auto* bucket = find(key);
  const double fallback_mean = mean_of(fallback_);
  if (bucket == nullptr) return fallback_mean;
  const double bucket_mean = mean_of(*bucket);
  const double k = options_.shrinkage_strength;
  if (k == 0.0) return bucket_mean;
  const double n = static_cast<double>(summary_count(*bucket));
  return (n * bucket_mean + k * fallback_mean) / (n + k);
}

ConditionalModel merge(const ConditionalModel& a, const ConditionalModel& b) {
  if (!(a.spec_ == b.spec_)) throw std::invalid_argument("merge: BiasSpec mismatch");
  if (!(a.options_ == b.options_)) throw std::invalid_argument("merge: options mismatch");
  if (a.kind_ != b.kind_) throw std::invalid_argument("merge: estimator mismatch");
  if (a.kind_ == EstimatorKind::parametric && a.family_ != b.family_) {
    throw std::invalid_argument("merge: family mismatch");
  }
  const std::size_t g = a.options_.grid_size;
  const auto combine = [&](const DistributionSummary& x,
                           const DistributionSummary& y) -> DistributionSummary {
    if (a.kind_ == EstimatorKind::empirical) {
      return EmpiricalSummary::merge(std::get<EmpiricalSummary>(x), std::get<EmpiricalSummary>(y),
                                     g);
    }
    return ParametricSummary::merge(std::get<ParametricSummary>(x),
                                    std::get<ParametricSummary>(y));
  };
  ConditionalModel out(a.spec_, a.kind_, a.family_, a.options_,
                       combine(a.fallback_, b.fallback_));
  out.buckets_ = a.buckets_;
  for (const auto& [key, summary] : b.buckets_) {
    auto it = out.buckets_.find(key);
    if (it == out.buckets_.end()) {
      out.buckets_.emplace(key, summary);
    } else {
      it->second = combine(it->second, summary);
    }
  }
  return out;
}

// --- serialization ---------------------------------------------------------

namespace {

json sum_to_json(const ExactSum& s) { return json(std::vector<double>(s.partials().begin(), s.partials().end())); }

ExactSum sum_from_json(const json& j) {
  return ExactSum::from_partials(j.get<std::vector<double>>());
}

json summary_to_json(const DistributionSummary& summary) {
  json j;
  if (const auto* e = std::get_if<EmpiricalSummary>(&summary)) {
    j["count"] = e->count();
    j["sum_partials"] = sum_to_json(e->sum());
    j["sample_mean"] = e->mean();
    j["sample_min"] = e->min();
    j["sample_max"] = e->max();
    j["quantile_grid"] = std::vector<double>(e->grid().begin(), e->grid().end());
    j["samples"] = std::vector<double>(e->samples().begin(), e->samples().end());
  } else {
    const auto& p = std::get<ParametricSummary>(summary);
    j["count"] = p.count();
    j["sum_values"] = sum_to_json(p.sum_values());
    j["sum_t"] = sum_to_json(p.sum_t());
    j["sum_t2"] = sum_to_json(p.sum_t2());
    j["location"] = p.location();
    j["scale"] = p.scale();
  }
  return j;
}

DistributionSummary summary_from_json(const json& j, EstimatorKind kind, Family family) {
  const auto count = require_field(j, "count").get<std::uint64_t>();
  if (kind == EstimatorKind::empirical) {
    return EmpiricalSummary::restore(require_field(j, "quantile_grid").get<std::vector<double>>(),
                                     require_field(j, "samples").get<std::vector<double>>(), count,
                                     sum_from_json(require_field(j, "sum_partials")),
                                     require_field(j, "sample_min").get<double>(),
                                     require_field(j, "sample_max").get<double>());
  }
  return ParametricSummary::restore(family, count, sum_from_json(require_field(j, "sum_values")),
                                    sum_from_json(require_field(j, "sum_t")),
                                    sum_from_json(require_field(j, "sum_t2")));
}

}  // namespace

nlohmann::json ConditionalModel::to_json() const {
  json doc;
  doc["format_version"] = kArtifactFormatVersion;
  doc["artifact"] = "conditional_model";
  doc["signal_name"] = options_.signal_name;
  doc["estimator"] = to_string(kind_);
  doc["family"] = to_string(family_);
  doc["transform_space"] = to_string(options_.transform);
  doc["grid_size"] = options_.grid_size;
  doc["min_bucket_count"] = options_.min_bucket_count;
  doc["shrinkage_strength"] = options_.shrinkage_strength;
  doc["bias_spec"] = bias_spec_to_json(spec_);
  doc["fallback"] = summary_to_json(fallback_);
  json buckets = json::array();
  for (const auto& [key, summary] : buckets_) {
    buckets.push_back({{"key", key.to_string()}, {"summary", summary_to_json(summary)}});
  }
  doc["buckets"] = std::move(buckets);
  return doc;
}

ConditionalModel ConditionalModel::from_json(const nlohmann::json& doc) {
  check_artifact(doc, "conditional_model");
  ConditionalOptions options;
  options.signal_name = require_field(doc, "signal_name").get<std::string>();
  options.grid_size = require_field(doc, "grid_size").get<std::size_t>();
  options.min_bucket_count = require_field(doc, "min_bucket_count").get<std::size_t>();
  options.shrinkage_strength = require_field(doc, "shrinkage_strength").get<double>();
  options.transform =
      parse_transform_space(require_field(doc, "transform_space").get<std::string>());
  options.validate();
  const auto kind = parse_estimator_kind(require_field(doc, "estimator").get<std::string>());
  const auto family = parse_family(require_field(doc, "family").get<std::string>());
  ConditionalModel model(bias_spec_from_json(require_field(doc, "bias_spec")), kind, family,
                         options, summary_from_json(require_field(doc, "fallback"), kind, family));
  for (const auto& entry : require_field(doc, "buckets")) {
    const auto key = BiasKey::parse(require_field(entry, "key").get<std::string>());
    model.spec_.validate_key(key);
    auto summary = summary_from_json(require_field(entry, "summary"), kind, family);
    if (summary_count(summary) == 0) {
      throw std::invalid_argument("bucket " + key.to_string() + " has no samples");
    }
    if (kind == EstimatorKind::empirical &&
        std::get<EmpiricalSummary>(summary).grid().size() != options.grid_size) {
      throw std::invalid_argument("bucket " + key.to_string() + " grid size mismatch");
    }
    model.buckets_.emplace(key, std::move(summary));
  }
  return model;
}

void ConditionalModel::save(const std::filesystem::path& path) const {
  write_json_file(path, to_json());
}

ConditionalModel ConditionalModel::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

}  // namespace alignpxtr
