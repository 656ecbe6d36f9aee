#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "alignpxtr/conddist.hpp"
#include "alignpxtr/metrics.hpp"
#include "alignpxtr/random.hpp"
#include "oracles.hpp"

using namespace alignpxtr;
using Catch::Approx;

namespace {

const BiasSpec kOne({{"only", Categorical{1}}});
const BiasSpec kTwo({{"group", Categorical{2}}});
const BiasKey k0{{0}};
const BiasKey k1{{1}};

ConditionalOptions opts(std::size_t min_count = 1, double k = 0.0) {
  ConditionalOptions o;
  o.signal_name = "s";
  o.min_bucket_count = min_count;
  o.shrinkage_strength = k;
  return o;
}

std::vector<Observation> in_bucket(const std::vector<double>& xs, const BiasKey& key) {
  std::vector<Observation> out;
  for (double x : xs) out.push_back({x, key});
  return out;
}

std::vector<double> lognormal_sample(std::size_t n, std::uint64_t seed, double mu = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(mu + 0.7 * rng.normal());
  return v;
}

}  // namespace

TEST_CASE("empirical cdf follows the Hazen positions") {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto m = ConditionalModel::fit_empirical(in_bucket(xs, k0), kOne, opts());
  CHECK(m.cdf(k0, 2.0) == Approx(oracle::hazen_cdf(xs, 2.0)));
  CHECK(m.cdf(k0, 2.0) == Approx(0.375));
  CHECK(m.cdf(k0, 2.5) == Approx(0.5));
  CHECK(m.cdf(k0, 3.7) == Approx(oracle::hazen_cdf(xs, 3.7)));
  CHECK(m.inv_cdf(k0, 0.375) == Approx(2.0));
  CHECK(m.inv_cdf(k0, 0.0) == 1.0);
  CHECK(m.inv_cdf(k0, 1.0) == 4.0);
}

TEST_CASE("degenerate bucket answers with the midpoint") {
  const auto m = ConditionalModel::fit_empirical(in_bucket({3.5, 3.5, 3.5}, k0), kOne, opts());
  CHECK(m.cdf(k0, 3.5) == 0.5);
  for (double tau : {0.0, 0.1, 0.5, 0.9, 1.0}) CHECK(m.inv_cdf(k0, tau) == 3.5);
  const auto c = m.cdf_value(k0, 3.5);
  CHECK(c.left == 0.0);
  CHECK(c.right == 1.0);
}

TEST_CASE("empirical cdf is clamped outside the sample range") {
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(i);
  const auto m = ConditionalModel::fit_empirical(in_bucket(xs, k0), kOne, opts());
  CHECK(m.cdf(k0, -5.0) == Approx(0.005));
  CHECK(m.cdf(k0, 500.0) == Approx(0.995));
}

TEST_CASE("hazen cdf matches the oracle with ties") {
  const std::vector<double> xs{1, 2, 2, 2, 5, 7, 7, 9};
  const auto m = ConditionalModel::fit_empirical(in_bucket(xs, k0), kOne, opts());
  for (double x : {1.0, 1.5, 2.0, 3.0, 5.0, 6.0, 7.0, 8.5, 9.0}) {
    CHECK(m.cdf(k0, x) == Approx(oracle::hazen_cdf(xs, x)));
  }
}

TEST_CASE("parametric fits use population moments") {
  const auto g = ConditionalModel::fit_parametric(in_bucket({0.0, 2.0}, k0), kOne, Family::gaussian, opts());
  const auto& s = std::get<ParametricSummary>(g.buckets().at(k0));
  CHECK(s.location() == 1.0);
  CHECK(s.scale() == 1.0);
  CHECK(g.cdf(k0, 1.0) == 0.5);
  CHECK(g.cdf(k0, 2.0) == Approx(oracle::phi(1.0)).epsilon(1e-12));
  CHECK(g.cdf(k0, 2.0) == Approx(0.8413).margin(1e-4));
  CHECK(g.inv_cdf(k0, 0.5) == Approx(1.0));
}

TEST_CASE("zero lognormal scale takes the fallback scale") {
  const double e = std::exp(1.0);
  auto obs = in_bucket({e, e}, k0);
  for (auto o : in_bucket({1.0, std::exp(2.0)}, k1)) obs.push_back(o);
  const auto m = ConditionalModel::fit_parametric(obs, kTwo, Family::lognormal, opts());
  const auto& s = std::get<ParametricSummary>(m.buckets().at(k0));
  CHECK(s.location() == Approx(1.0));
  CHECK(s.scale() == 0.0);
  // Fallback over log values {1, 1, 0, 2}: mean 1, population sd sqrt(1/2).
  const double fb_scale = std::sqrt(0.5);
  CHECK(m.cdf(k0, std::exp(1.0 + fb_scale)) == Approx(oracle::phi(1.0)).epsilon(1e-9));
  CHECK(m.cdf(k0, e) == Approx(0.5));
}

TEST_CASE("lognormal rejects non-positive values") {
  CHECK_THROWS_AS(
      ConditionalModel::fit_parametric(in_bucket({1.0, 0.0}, k0), kOne, Family::lognormal, opts()),
      std::invalid_argument);
}

TEST_CASE("conditional mean shrinks toward the fallback") {
  SECTION("zero shrinkage keeps the bucket mean") {
    auto obs = in_bucket(std::vector<double>(1000, 3.0), k0);
    for (auto o : in_bucket(std::vector<double>(1000, 7.0), k1)) obs.push_back(o);
    const auto m = ConditionalModel::fit_empirical(obs, kTwo, opts(100, 0.0));
    CHECK(m.cond_mean(k0) == 3.0);
  }
  SECTION("equal weights give the midpoint") {
    auto obs = in_bucket(std::vector<double>(100, 3.0), k0);
    for (auto o : in_bucket(std::vector<double>(100, 7.0), k1)) obs.push_back(o);
    const auto m = ConditionalModel::fit_empirical(obs, kTwo, opts(100, 100.0));
    CHECK(m.cond_mean(k0) == Approx(4.0));
  }
  SECTION("empty bucket uses the fallback mean") {
    const auto m = ConditionalModel::fit_empirical(in_bucket({3.0, 5.0}, k1), kTwo, opts());
    CHECK(m.cond_mean(k0) == 4.0);
    CHECK(m.cdf(k0, 4.0) == m.cdf(k1, 4.0));
  }
}

TEST_CASE("sparse bucket cdf blends toward the fallback") {
  std::vector<double> a{1, 2, 3, 4};
  std::vector<double> b{10, 11, 12, 13};
  auto obs = in_bucket(a, k0);
  for (auto o : in_bucket(b, k1)) obs.push_back(o);
  const auto m = ConditionalModel::fit_empirical(obs, kTwo, opts(100, 4.0));
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const double expected = (4.0 * oracle::hazen_cdf(a, 2.5) + 4.0 * oracle::hazen_cdf(all, 2.5)) / 8.0;
  CHECK(m.cdf(k0, 2.5) == Approx(expected));
  const double tau = m.cdf(k0, 2.5);
  CHECK(m.inv_cdf(k0, tau) == Approx(2.5).margin(1e-9));
}

TEST_CASE("queries reject invalid input") {
  const auto m = ConditionalModel::fit_empirical(in_bucket({1, 2}, k0), kOne, opts());
  CHECK_THROWS_AS(m.cdf(BiasKey{{1}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.cdf(k0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(m.inv_cdf(k0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(m.inv_cdf(k0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(ConditionalModel::fit_empirical({}, kOne, opts()), std::invalid_argument);
  CHECK_THROWS_AS(ConditionalModel::fit_empirical(in_bucket({1.0}, BiasKey{{0, 0}}), kOne, opts()),
                  std::invalid_argument);
}

TEST_CASE("log1p space: inverse returns raw values, means stay transformed") {
  auto o = opts();
  o.transform = TransformSpace::log1p;
  const std::vector<double> xs{0.0, 1.0, 3.0, 7.0};
  const auto m = ConditionalModel::fit_empirical(in_bucket(xs, k0), kOne, o);
  CHECK(m.cdf(k0, 1.0) == Approx(0.375));
  CHECK(m.inv_cdf(k0, 0.375) == Approx(1.0));
  CHECK(m.cond_mean(k0) == Approx((std::log(1.0) + std::log(2.0) + std::log(4.0) + std::log(8.0)) / 4));
}

TEST_CASE("merge matches pooled fits") {
  const auto a = ConditionalModel::fit_empirical(in_bucket({1, 2}, k0), kOne, opts());
  const auto b = ConditionalModel::fit_empirical(in_bucket({3, 4}, k0), kOne, opts());
  const auto pooled = ConditionalModel::fit_empirical(in_bucket({1, 2, 3, 4}, k0), kOne, opts());
  const auto merged = merge(a, b);
  const double g = 1.0 / 1024;
  for (double x = 0.5; x <= 4.5; x += 0.125) CHECK(std::fabs(merged.cdf(k0, x) - pooled.cdf(k0, x)) <= g);
}

TEST_CASE("merge of large buckets stays within a grid step of the pooled fit") {
  const auto xa = lognormal_sample(30000, 1);
  const auto xb = lognormal_sample(20000, 2, 1.4);
  std::vector<double> all = xa;
  all.insert(all.end(), xb.begin(), xb.end());
  const auto a = ConditionalModel::fit_empirical(in_bucket(xa, k0), kOne, opts());
  const auto b = ConditionalModel::fit_empirical(in_bucket(xb, k0), kOne, opts());
  const auto pooled = ConditionalModel::fit_empirical(in_bucket(all, k0), kOne, opts());
  const auto merged = merge(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < all.size(); i += 37) {
    worst = std::max(worst, std::fabs(merged.cdf(k0, all[i]) - pooled.cdf(k0, all[i])));
  }
  CHECK(worst <= 1.0 / 1024);
}

TEST_CASE("merge counts and means") {
  auto a = ConditionalModel::fit_empirical(in_bucket(std::vector<double>(100, 2.0), k0), kOne, opts());
  auto b = ConditionalModel::fit_empirical(in_bucket(std::vector<double>(50, 5.0), k0), kOne, opts());
  const auto m = merge(a, b);
  CHECK(m.count(k0) == 150);
  CHECK(m.cond_mean(k0) == 3.0);
  const auto empty = ConditionalModel::empty(kOne, EstimatorKind::empirical, Family::gaussian, opts());
  const auto same = merge(a, empty);
  for (double x : {1.0, 2.0, 3.0}) CHECK(same.cdf(k0, x) == a.cdf(k0, x));
  CHECK(same.count(k0) == 100);
}

TEST_CASE("merge rejects mismatched models") {
  const auto a = ConditionalModel::fit_empirical(in_bucket({1, 2}, k0), kOne, opts());
  auto o = opts();
  o.grid_size = 512;
  const auto b = ConditionalModel::fit_empirical(in_bucket({1, 2}, k0), kOne, o);
  CHECK_THROWS_AS(merge(a, b), std::invalid_argument);
  const auto c = ConditionalModel::fit_empirical(in_bucket({1, 2}, k0), kTwo, opts());
  CHECK_THROWS_AS(merge(a, c), std::invalid_argument);
}

TEST_CASE("property: merge is commutative and exactly associative on counts and means") {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    Rng rng(100 + trial);
    std::vector<ConditionalModel> parts;
    for (int p = 0; p < 3; ++p) {
      std::vector<Observation> obs;
      const auto n = 1 + rng.below(3000);
      for (std::uint64_t i = 0; i < n; ++i) obs.push_back({rng.normal() * 10.0 + 0.1, rng.below(2) ? k0 : k1});
      parts.push_back(ConditionalModel::fit_empirical(obs, kTwo, opts()));
    }
    const auto left = merge(merge(parts[0], parts[1]), parts[2]);
    const auto right = merge(parts[0], merge(parts[1], parts[2]));
    const auto ab = merge(parts[0], parts[1]);
    const auto ba = merge(parts[1], parts[0]);
    for (const auto& key : {k0, k1}) {
      CHECK(left.count(key) == right.count(key));
      CHECK(left.cond_mean(key) == right.cond_mean(key));
      for (double x : {-10.0, 0.0, 3.3, 12.0}) CHECK(ab.cdf(key, x) == ba.cdf(key, x));
    }
  }
}

TEST_CASE("property: cdf and inverse are monotone") {
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    Rng rng(trial);
    std::vector<Observation> obs;
    const auto n = 5 + rng.below(5000);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double x = rng.below(4) == 0 ? 1.0 : std::exp(rng.normal());
      obs.push_back({x, rng.below(3) == 0 ? k0 : k1});
    }
    for (const double k : {0.0, 50.0}) {
      const auto m = ConditionalModel::fit_empirical(obs, kTwo, opts(100, k));
      for (const auto& key : {k0, k1}) {
        double prev = 0.0;
        for (double x = -1.0; x < 12.0; x += 0.01) {
          const double c = m.cdf(key, x);
          REQUIRE(c >= prev);
          REQUIRE(c >= 0.0);
          REQUIRE(c <= 1.0);
          prev = c;
        }
        double prev_x = -1e300;
        for (double tau = 0.0; tau <= 1.0; tau += 0.001) {
          const double x = m.inv_cdf(key, tau);
          REQUIRE(x >= prev_x);
          prev_x = x;
        }
      }
    }
  }
}

TEST_CASE("property: cdf(inv_cdf(cdf(x))) round trip within a grid step") {
  for (std::size_t n : {50u, 1000u, 20000u}) {
    const auto xs = lognormal_sample(n, n);
    const auto m = ConditionalModel::fit_empirical(in_bucket(xs, k0), kOne, opts());
    for (double x : xs) {
      const double c = m.cdf(k0, x);
      REQUIRE(std::fabs(m.cdf(k0, m.inv_cdf(k0, c)) - c) <= 1.0 / 1024);
    }
  }
}

TEST_CASE("property: training values map to near-uniform scores") {
  for (std::size_t n : {200u, 1024u, 5000u, 50000u}) {
    const auto xs = lognormal_sample(n, 7 * n);
    const auto m = ConditionalModel::fit_empirical(in_bucket(xs, k0), kOne, opts());
    std::vector<double> z;
    for (double x : xs) z.push_back(m.cdf(k0, x));
    const double bound = 1.0 / (2.0 * std::min<double>(n, 1024)) + 1.0 / 1024;
    CHECK(ks_uniformity(z).d_statistic <= bound);
  }
}

TEST_CASE("artifacts reproduce every query bit-exactly") {
  auto obs = in_bucket(lognormal_sample(3000, 9), k0);
  for (auto o : in_bucket(lognormal_sample(40, 10, 2.0), k1)) obs.push_back(o);
  const auto dir = std::filesystem::temp_directory_path() / "alignpxtr_conddist_test";
  std::filesystem::create_directories(dir);
  for (const bool parametric : {false, true}) {
    auto o = opts(100, 50.0);
    o.transform = TransformSpace::log1p;
    const auto m = parametric ? ConditionalModel::fit_parametric(obs, kTwo, Family::lognormal, o)
                              : ConditionalModel::fit_empirical(obs, kTwo, o);
    const auto path = dir / "model.json";
    m.save(path);
    const auto r = ConditionalModel::load(path);
    CHECK(r.to_json() == m.to_json());
    for (const auto& key : {k0, k1}) {
      CHECK(r.cond_mean(key) == m.cond_mean(key));
      for (double x : {0.1, 1.0, 2.7, 5.0, 30.0}) CHECK(r.cdf(key, x) == m.cdf(key, x));
      for (double t : {0.0, 0.01, 0.5, 0.77, 1.0}) CHECK(r.inv_cdf(key, t) == m.inv_cdf(key, t));
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("artifacts with a bad version are rejected") {
  const auto m = ConditionalModel::fit_empirical(in_bucket({1, 2}, k0), kOne, opts());
  auto doc = m.to_json();
  doc["format_version"] = 99;
  CHECK_THROWS_AS(ConditionalModel::from_json(doc), std::invalid_argument);
}

TEST_CASE("summary grid invariants") {
  const auto xs = lognormal_sample(5000, 4);
  const auto s = EmpiricalSummary::fit(xs, 1024);
  REQUIRE(s.grid().size() == 1024);
  CHECK(s.min() <= s.grid().front());
  CHECK(s.grid().back() <= s.max());
  CHECK(std::is_sorted(s.grid().begin(), s.grid().end()));
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  CHECK(s.grid()[511] == Approx(hazen_quantile(sorted, 511.5 / 1024)));
  CHECK(s.samples().empty());
}
