#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "alignpxtr/bias.hpp"
#include "alignpxtr/conddist.hpp"
#include "alignpxtr/quantile_regression.hpp"

namespace alignpxtr {

struct UniformTarget {
  bool operator==(const UniformTarget&) const = default;
};
struct GaussianTarget {
  double location = 0.0;
  double scale = 1.0;
  bool operator==(const GaussianTarget&) const = default;
};
/// Reference quantiles at equi-spaced levels j/(m-1), endpoints included.
struct EmpiricalTarget {
  std::vector<double> quantiles;
  bool operator==(const EmpiricalTarget&) const = default;
};

/// Distribution that uniform scores are reshaped into by inverse transform.
using TargetDistribution = std::variant<UniformTarget, GaussianTarget, EmpiricalTarget>;

void validate_target(const TargetDistribution& target);
nlohmann::json target_to_json(const TargetDistribution& target);
TargetDistribution target_from_json(const nlohmann::json& doc);
double target_cdf(const TargetDistribution& target, double v);
double target_quantile(const TargetDistribution& target, double z);

/// Deterministic mode returns the point CDF. Randomized mode spreads values
/// that fall on an atom uniformly over the atom's probability mass, which
/// makes the output exactly uniform for discrete laws.
struct Deterministic {};
struct Randomized {
  std::uint64_t seed = 0;
};
using TieMode = std::variant<Deterministic, Randomized>;

/// Conditional estimator usable by the aligner.
using SignalModel = std::variant<ConditionalModel, QuantileRegModel>;

/// z = F(x | y). Throws on a non-finite x or an invalid key.
double quantile_map(const ConditionalModel& model, const BiasKey& key, double x,
                    const TieMode& tie = Deterministic{});
double quantile_map(const QuantileRegModel& model, const BiasKey& key, double x,
                    const TieMode& tie = Deterministic{});
double quantile_map(const SignalModel& model, const BiasKey& key, double x,
                    const TieMode& tie = Deterministic{});

/// z = x - E[X | y], both in the model's transform space.
double mean_align(const ConditionalModel& model, const BiasKey& key, double x);

/// z' = F_G^{-1}(z) for z in [0, 1].
double to_target(double z, const TargetDistribution& target);

enum class AlignMethod { quantile, mean };
std::string_view to_string(AlignMethod m);
AlignMethod parse_align_method(std::string_view s);

/// Importance weights per signal. Construction validates finiteness and that
/// at least one weight is nonzero.
class FusionWeights {
 public:
  FusionWeights() = default;
  explicit FusionWeights(std::map<std::string, double> weights);
  const std::map<std::string, double>& weights() const { return weights_; }

 private:
  std::map<std::string, double> weights_;
};

/// z_final = sum_i w_i * z_i. Signals with weight zero may be absent.
double fuse(const std::map<std::string, double>& per_signal, const FusionWeights& weights);

struct SignalScore {
  AlignMethod method = AlignMethod::quantile;
  double z = 0.0;
};

struct AlignedScore {
  std::map<std::string, SignalScore> per_signal;
  double z_final = 0.0;
  /// Quantile-mapped and mean-aligned scores were fused together.
  bool mixed_methods = false;
};

struct SignalAlignment {
  AlignMethod method = AlignMethod::quantile;
  TargetDistribution target = UniformTarget{};
  bool operator==(const SignalAlignment&) const = default;
};

struct ScoreRequest {
  std::map<std::string, double> predictions;
  std::map<std::string, BiasKey> keys;
};

struct PipelineSetup {
  std::map<std::string, SignalModel> models;
  std::map<std::string, SignalAlignment> alignment;
  FusionWeights weights;
  TieMode tie = Deterministic{};
};

/// Aligns every configured signal of one record and fuses the results.
/// `row` selects the per-row stream under randomized tie mode, so batch
/// results do not depend on evaluation order.
AlignedScore score_pipeline(const ScoreRequest& request, const PipelineSetup& setup,
                            std::uint64_t row = 0);

}  // namespace alignpxtr
