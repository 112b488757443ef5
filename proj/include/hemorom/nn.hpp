#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hemorom/linalg.hpp"

namespace hemorom {

struct NetworkConfig {
  int hidden_layers = 2;
  int neurons = 32;
  int epochs = 50000;
  double learning_rate = 3e-2;
  double train_fraction = 0.8;
  uint64_t seed = 2;

  void validate() const;
};

/// Numerically stable softplus and its derivative.
double softplus(double x);
double softplus_derivative(double x);

/// Fully connected feedforward network: softplus hidden layers, affine output.
class Network {
 public:
  Network() = default;

  /// layer_sizes = {in, hidden..., out}; weights drawn uniformly from
  /// [-1/sqrt(fan_in), 1/sqrt(fan_in)] with a seeded generator, biases zero.
  static Network create(const std::vector<int>& layer_sizes, uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int n_layers() const { return static_cast<int>(weights_.size()); }

  std::vector<double> forward(const std::vector<double>& input) const;

  /// Mean squared error over all samples and outputs, and its parameter
  /// gradient by backpropagation. Rows of inputs/targets are samples.
  double loss_and_gradient(const DenseMatrix& inputs, const DenseMatrix& targets,
                           std::vector<DenseMatrix>* grad_w,
                           std::vector<std::vector<double>>* grad_b) const;
  double loss(const DenseMatrix& inputs, const DenseMatrix& targets) const;

  std::vector<DenseMatrix>& weights() { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<DenseMatrix>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

 private:
  std::vector<int> sizes_;
  std::vector<DenseMatrix> weights_;           ///< per layer, out x in
  std::vector<std::vector<double>> biases_;    ///< per layer
};

struct Normalization {
  double t_mean = 0.0, t_scale = 1.0;
  std::vector<double> y_mean, y_scale;
};

struct TrainHistory {
  std::vector<double> train_loss, test_loss;
  std::vector<int> train_indices, test_indices;
};

/// Full-batch gradient descent on the normalized samples with a seeded
/// train/test split. Loss histories are recorded every epoch.
TrainHistory train_network(Network& net, const std::vector<double>& t_samples,
                           const DenseMatrix& targets, const NetworkConfig& cfg,
                           Normalization& norm);

/// Max relative deviation between backprop and central finite differences
/// over every parameter, on one sample.
double gradient_check(const Network& net, const std::vector<double>& input,
                      const std::vector<double>& target, double step = 1e-6);

/// Trained map from time to the outlet pressures, with normalization and the
/// training hull for extrapolation flagging. Persisted as `ROMNN v1`.
struct OutflowModel {
  std::vector<Network> nets;  ///< one multi-output net, or one per outlet
  Normalization norm;
  double t_min = 0.0, t_max = 0.0;
  int n_outlets = 0;

  std::vector<double> predict(double t, bool* extrapolated = nullptr) const;

  void save(const std::filesystem::path& path) const;
  static OutflowModel load(const std::filesystem::path& path);
};

/// Train the outflow map on trace samples; `per_outlet` selects independent
/// single-output networks instead of one multi-output network.
OutflowModel fit_outflow_model(const std::vector<double>& times,
                               const DenseMatrix& g_p, const NetworkConfig& cfg,
                               bool per_outlet, TrainHistory* history = nullptr);

}  // namespace hemorom
