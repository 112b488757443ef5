#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "hemorom/errors.hpp"
#include "hemorom/nn.hpp"
#include "hemorom/windkessel.hpp"

using namespace hemorom;

namespace {

WindkesselParams channel_wk() {
  WindkesselParams p;
  p.rp = 1e4;
  p.rd = 1e5;
  p.c = 0.07957e-5;
  return p;
}

}  // namespace

TEST_CASE("softplus forward values") {
  // Single hidden neuron, zero weights and bias: softplus(0) = ln 2.
  Network net = Network::create({1, 1, 1}, 7);
  for (auto& w : net.weights()) std::fill(w.a.begin(), w.a.end(), 0.0);
  for (auto& b : net.biases()) std::fill(b.begin(), b.end(), 0.0);
  // output layer passes the hidden activation through with weight 1
  net.weights()[1](0, 0) = 1.0;
  CHECK(net.forward({5.0})[0] ==
        doctest::Approx(0.69314718055994531).epsilon(1e-14));

  // w = 1, bias 0, input 1: softplus(1) = ln(1 + e).
  net.weights()[0](0, 0) = 1.0;
  CHECK(net.forward({1.0})[0] ==
        doctest::Approx(1.3132616875182228).epsilon(1e-14));

  // All-zero final-layer weights: the output equals the final bias.
  net.weights()[1](0, 0) = 0.0;
  net.biases()[1][0] = -2.5;
  CHECK(net.forward({0.3})[0] == -2.5);
  CHECK(net.forward({123.0})[0] == -2.5);
}

TEST_CASE("softplus is numerically stable at extremes") {
  CHECK(softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(softplus(-1000.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(softplus_derivative(1000.0)));
  CHECK(softplus_derivative(1000.0) == doctest::Approx(1.0));
  CHECK(softplus_derivative(-1000.0) == doctest::Approx(0.0));
}

TEST_CASE("gradient check: affine network is exact") {
  // No hidden layer: the loss is quadratic in every parameter, so central
  // differences agree to round-off.
  Network net = Network::create({2, 1}, 11);
  const double dev = gradient_check(net, {0.4, -1.2}, {0.7});
  CHECK(dev < 1e-9);
}

TEST_CASE("gradient check: random softplus networks") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Network net = Network::create({1, 8, 8, 1}, seed);
    const double dev = gradient_check(net, {0.37}, {-0.9});
    CHECK(dev < 1e-6);
  }
}

TEST_CASE("gradient check: zero-parameter network is well defined") {
  Network net = Network::create({1, 4, 1}, 3);
  for (auto& w : net.weights()) std::fill(w.a.begin(), w.a.end(), 0.0);
  for (auto& b : net.biases()) std::fill(b.begin(), b.end(), 0.0);
  const double dev = gradient_check(net, {0.5}, {1.0});
  CHECK(std::isfinite(dev));
  CHECK(dev < 1e-6);
}

TEST_CASE("constant target: loss collapses and the bias learns the value") {
  std::vector<double> times;
  DenseMatrix targets(12, 1);
  for (int k = 0; k < 12; ++k) {
    times.push_back(0.1 * k);
    targets(k, 0) = 3.25;
  }
  NetworkConfig cfg;
  cfg.hidden_layers = 1;
  cfg.neurons = 8;
  cfg.epochs = 20000;
  cfg.learning_rate = 1e-2;
  cfg.seed = 5;
  Network net = Network::create({1, 8, 1}, cfg.seed);
  Normalization norm;
  const TrainHistory hist = train_network(net, times, targets, cfg, norm);
  CHECK(hist.train_loss[4999] < 1e-5);  // already tiny after 5000 epochs
  CHECK(hist.train_loss.back() < 1e-8);

  // Monotone descent at this step size: no increase beyond round-off.
  for (size_t e = 1; e < hist.train_loss.size(); ++e)
    CHECK(hist.train_loss[e] <= hist.train_loss[e - 1] + 1e-12);

  // De-normalized prediction reproduces the constant at a training time.
  const double pred =
      net.forward({(0.5 - norm.t_mean) / norm.t_scale})[0] * norm.y_scale[0] +
      norm.y_mean[0];
  CHECK(std::abs(pred - 3.25) < 1e-3);
}

TEST_CASE("outflow model fits the closed-form trace to held-out midpoints") {
  const WindkesselParams wk = channel_wk();
  const double u0 = 0.007957, radius = 0.02;
  std::vector<double> times;
  DenseMatrix targets(50, 1);
  for (int k = 0; k < 50; ++k) {
    const double t = 0.02 * (k + 1);
    times.push_back(t);
    targets(k, 0) = analytic_outflow_pressure_pipe(t, u0, radius, wk);
  }
  NetworkConfig cfg;  // desk defaults
  TrainHistory hist;
  const OutflowModel model = fit_outflow_model(times, targets, cfg, false, &hist);

  // 1%-relative (trace norm) accuracy on the held-out midpoints.
  double err2 = 0.0, ref2 = 0.0;
  for (int k = 0; k + 1 < 50; ++k) {
    const double t = 0.02 * (k + 1) + 0.01;
    const double exact = analytic_outflow_pressure_pipe(t, u0, radius, wk);
    const double pred = model.predict(t)[0];
    err2 += (pred - exact) * (pred - exact);
    ref2 += exact * exact;
  }
  CHECK(std::sqrt(err2 / ref2) < 0.01);

  // Train and test histories both decrease and stay comparable.
  CHECK(hist.train_loss.back() < hist.train_loss.front());
  CHECK(hist.test_loss.back() < hist.test_loss.front());
  CHECK(hist.test_loss.back() <= 3.0 * hist.train_loss.back());
}

TEST_CASE("training is reproducible for a fixed seed") {
  std::vector<double> times;
  DenseMatrix targets(20, 1);
  for (int k = 0; k < 20; ++k) {
    times.push_back(0.05 * (k + 1));
    targets(k, 0) = std::sin(3.0 * times[k]);
  }
  NetworkConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 42;
  Network n1 = Network::create({1, 16, 1}, cfg.seed);
  Network n2 = Network::create({1, 16, 1}, cfg.seed);
  Normalization norm1, norm2;
  const TrainHistory h1 = train_network(n1, times, targets, cfg, norm1);
  const TrainHistory h2 = train_network(n2, times, targets, cfg, norm2);
  CHECK(h1.train_loss == h2.train_loss);
  CHECK(h1.test_loss == h2.test_loss);
  CHECK(h1.train_indices == h2.train_indices);
}

TEST_CASE("diverging training reports the epoch") {
  std::vector<double> times = {0.0, 0.5, 1.0, 1.5};
  DenseMatrix targets(4, 1);
  for (int k = 0; k < 4; ++k) targets(k, 0) = k;
  NetworkConfig cfg;
  cfg.learning_rate = 1e12;
  cfg.epochs = 50;
  Network net = Network::create({1, 8, 1}, 2);
  Normalization norm;
  CHECK_THROWS_AS(train_network(net, times, targets, cfg, norm), NumericalError);
}

TEST_CASE("model file round-trips predictions exactly") {
  std::vector<double> times;
  DenseMatrix targets(10, 2);
  for (int k = 0; k < 10; ++k) {
    times.push_back(0.1 * (k + 1));
    targets(k, 0) = std::sin(times[k]);
    targets(k, 1) = std::cos(times[k]);
  }
  NetworkConfig cfg;
  cfg.epochs = 100;
  const OutflowModel model = fit_outflow_model(times, targets, cfg, false);
  const auto path =
      std::filesystem::temp_directory_path() / "hemorom_nn_model.txt";
  model.save(path);
  const OutflowModel back = OutflowModel::load(path);
  REQUIRE(back.n_outlets == 2);
  for (double t : {0.15, 0.55, 0.95}) {
    const auto a = model.predict(t);
    const auto b = back.predict(t);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }
}

TEST_CASE("per-outlet variant produces one network per outlet") {
  std::vector<double> times;
  DenseMatrix targets(10, 2);
  for (int k = 0; k < 10; ++k) {
    times.push_back(0.1 * (k + 1));
    targets(k, 0) = times[k];
    targets(k, 1) = 2.0 * times[k];
  }
  NetworkConfig cfg;
  cfg.epochs = 50;
  const OutflowModel model = fit_outflow_model(times, targets, cfg, true);
  CHECK(model.nets.size() == 2);
  CHECK(model.predict(0.35).size() == 2);
}

TEST_CASE("extrapolation outside the training hull is flagged") {
  std::vector<double> times = {0.1, 0.2, 0.3, 0.4};
  DenseMatrix targets(4, 1);
  for (int k = 0; k < 4; ++k) targets(k, 0) = times[k];
  NetworkConfig cfg;
  cfg.epochs = 10;
  const OutflowModel model = fit_outflow_model(times, targets, cfg, false);
  bool flag = false;
  model.predict(0.25, &flag);
  CHECK(!flag);
  model.predict(0.9, &flag);
  CHECK(flag);
  model.predict(0.01, &flag);
  CHECK(flag);
}

TEST_CASE("config validation") {
  NetworkConfig cfg;
  cfg.train_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NetworkConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(Network::create({1}, 0), ConfigError);
}
