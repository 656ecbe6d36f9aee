#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "alignpxtr/behavior.hpp"
#include "alignpxtr/random.hpp"
#include "alignpxtr/simulator.hpp"

using namespace alignpxtr;
using Catch::Approx;

namespace {

// Closed-form simple least squares.
std::pair<double, double> least_squares(const std::vector<double>& f, const std::vector<double>& s) {
  double mf = 0, ms = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mf += f[i];
    ms += s[i];
  }
  mf /= f.size();
  ms /= s.size();
  double sff = 0, sfs = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sff += (f[i] - mf) * (f[i] - mf);
    sfs += (f[i] - mf) * (s[i] - ms);
  }
  const double w = sfs / sff;
  return {w, ms - w * mf};
}

Dataset noisy_data(std::size_t n, std::size_t dim, bool binary, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d(dim);
  std::vector<double> f(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.3;
    for (auto& v : f) {
      v = rng.normal();
      t += 0.7 * v;
    }
    d.add(f, binary ? (rng.uniform() < 1.0 / (1.0 + std::exp(-t)) ? 1.0 : 0.0) : t + rng.normal());
  }
  return d;
}

}  // namespace

TEST_CASE("regressor recovers an exact line") {
  Rng rng(1);
  Dataset data(1);
  std::vector<double> f;
  std::vector<double> s;
  for (int i = 0; i < 500; ++i) {
    f.push_back(2.0 * rng.uniform() - 1.0);
    s.push_back(2.0 * f.back() + 1.0);
    data.add(std::vector<double>{f.back()}, s.back());
  }
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 32;
  const auto model = train_regressor(data, cfg, "w");
  const auto [w, b] = least_squares(f, s);
  CHECK(model.weights()[0] == Approx(w).margin(1e-3));
  CHECK(model.intercept() == Approx(b).margin(1e-3));
  CHECK(model.weights()[0] == Approx(2.0).margin(1e-3));
  CHECK(model.intercept() == Approx(1.0).margin(1e-3));
}

TEST_CASE("regressor on a constant target learns the constant") {
  Dataset data(0);
  for (int i = 0; i < 100; ++i) data.add(std::vector<double>{}, 2.5);
  TrainConfig cfg;
  cfg.epochs = 100;
  const auto model = train_regressor(data, cfg, "w");
  CHECK(model.predict(std::vector<double>{}) == Approx(2.5).margin(1e-6));
}

TEST_CASE("classifier learns the base rate") {
  Dataset data(0);
  for (int i = 0; i < 1000; ++i) data.add(std::vector<double>{}, i % 10 < 3 ? 1.0 : 0.0);
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 300;
  cfg.batch_size = 1000;
  const auto model = train_classifier(data, cfg, "like");
  CHECK(model.predict(std::vector<double>{}) == Approx(0.3).margin(1e-3));
  CHECK(model.intercept() == Approx(std::log(0.3 / 0.7)).margin(5e-3));
}

TEST_CASE("classifier separates separable data") {
  Dataset data(1);
  Rng rng(2);
  for (int i = 0; i < 400; ++i) {
    const double f = rng.uniform() * 2.0 - 1.0;
    if (std::fabs(f) < 0.05) continue;
    data.add(std::vector<double>{f}, f > 0 ? 1.0 : 0.0);
  }
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.l2_penalty = 1e-4;
  const auto model = train_classifier(data, cfg, "like");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += (model.predict(data.row(i)) > 0.5) == (data.target(i) == 1.0);
  }
  CHECK(correct == data.size());
}

TEST_CASE("single-class data pushes predictions to the class") {
  Dataset data(1);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) data.add(std::vector<double>{rng.normal()}, 1.0);
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 500;
  cfg.l2_penalty = 0.01;
  const auto model = train_classifier(data, cfg, "like");
  CHECK(model.predict(std::vector<double>{0.0}) > 0.95);
}

TEST_CASE("predict applies the link") {
  CHECK(PredictorModel({0.0}, 0.0, Link::logistic, "l").predict(std::vector<double>{4.0}) == 0.5);
  CHECK(PredictorModel({2.0}, 1.0, Link::identity, "w").predict(std::vector<double>{3.0}) == 7.0);
  const double t = std::log(0.8413 / (1 - 0.8413));
  const PredictorModel m({1.0}, 0.0, Link::logistic, "l");
  CHECK(m.predict(std::vector<double>{t}) == Approx(1.0 / (1.0 + std::exp(-t))).epsilon(1e-12));
  CHECK_THROWS_AS(m.predict(std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(m.predict(std::vector<double>{NAN}), std::invalid_argument);
}

TEST_CASE("training rejects bad input") {
  Dataset empty(1);
  CHECK_THROWS_AS(train_regressor(empty, {}, "w"), std::invalid_argument);
  Dataset data(1);
  data.add(std::vector<double>{1.0}, 0.5);
  CHECK_THROWS_AS(train_classifier(data, {}, "l"), std::invalid_argument);
  TrainConfig zero;
  zero.epochs = 0;
  CHECK_THROWS_AS(train_regressor(data, zero, "w"), std::invalid_argument);
  CHECK_THROWS_AS(data.add(std::vector<double>{NAN}, 1.0), std::invalid_argument);
}

TEST_CASE("divergence names the epoch") {
  auto data = noisy_data(200, 3, false, 4);
  TrainConfig cfg;
  cfg.learning_rate = 1000.0;
  cfg.epochs = 200;
  try {
    (void)train_regressor(data, cfg, "w");
    FAIL("expected divergence");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("training losses end no higher than they start") {
  const auto reg = train_regressor(noisy_data(2000, 3, false, 5), {}, "w");
  CHECK(reg.training_losses().back() <= reg.training_losses().front());
  const auto cls = train_classifier(noisy_data(2000, 3, true, 6), {}, "l");
  CHECK(cls.training_losses().back() <= cls.training_losses().front());
}

TEST_CASE("property: analytic gradients match finite differences") {
  for (const bool binary : {false, true}) {
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
      const auto data = noisy_data(50, 3, binary, 10 + trial);
      Rng rng(trial);
      std::vector<double> w{rng.normal(), rng.normal(), rng.normal()};
      const double b = rng.normal();
      const double l2 = 0.1;
      const auto loss = [&](const std::vector<double>& ww, double bb) {
        return binary ? bce_loss_gradient(ww, bb, data, l2).loss : mse_loss_gradient(ww, bb, data, l2).loss;
      };
      const auto g = binary ? bce_loss_gradient(w, b, data, l2) : mse_loss_gradient(w, b, data, l2);
      const double h = 1e-5;
      for (std::size_t j = 0; j < w.size(); ++j) {
        auto up = w;
        auto down = w;
        up[j] += h;
        down[j] -= h;
        const double fd = (loss(up, b) - loss(down, b)) / (2 * h);
        CHECK(std::fabs(fd - g.weights[j]) <= 1e-4 * std::max(1.0, std::fabs(fd)));
      }
      const double fd_b = (loss(w, b + h) - loss(w, b - h)) / (2 * h);
      CHECK(std::fabs(fd_b - g.intercept) <= 1e-4 * std::max(1.0, std::fabs(fd_b)));
    }
  }
}

TEST_CASE("training is deterministic and round trips through json") {
  const auto data = noisy_data(500, 2, true, 7);
  TrainConfig cfg;
  cfg.seed = 9;
  const auto a = train_classifier(data, cfg, "l");
  const auto b = train_classifier(data, cfg, "l");
  CHECK(a.to_json() == b.to_json());
  const auto back = PredictorModel::from_json(a.to_json());
  CHECK(back.to_json() == a.to_json());
  for (double f : {-1.0, 0.3}) {
    const std::vector<double> x{f, 2 * f};
    CHECK(back.predict(x) == a.predict(x));
    const double p = a.predict(x);
    CHECK((p > 0.0 && p < 1.0));
  }
}

TEST_CASE("oracle predictor returns the latent value") {
  GroundTruthRecord r;
  r.latent = {{"watch", 12.5}, {"like", 0.31}};
  CHECK(oracle_predict(r, "watch") == 12.5);
  CHECK(oracle_predict(r, "like") == 0.31);
  CHECK_THROWS_AS(oracle_predict(r, "share"), std::invalid_argument);
}
