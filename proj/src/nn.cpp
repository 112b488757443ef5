#include "hemorom/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "hemorom/errors.hpp"
#include "hemorom/io.hpp"

namespace hemorom {

void NetworkConfig::validate() const {
  if (hidden_layers < 1 || neurons < 1 || epochs < 1)
    throw ConfigError("nn: layer/neuron/epoch counts must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("nn: learning rate must be > 0");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("nn: train fraction must lie in (0, 1)");
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_derivative(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// splitmix64: small, deterministic across platforms.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
};

}  // namespace

Network Network::create(const std::vector<int>& layer_sizes, uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw ConfigError("network: need at least input and output layers");
  for (int s : layer_sizes)
    if (s < 1) throw ConfigError("network: layer sizes must be >= 1");
  Network net;
  net.sizes_ = layer_sizes;
  Rng rng(seed);
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    DenseMatrix w(fan_out, fan_in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : w.a) x = rng.uniform(-bound, bound);
    net.weights_.push_back(std::move(w));
    net.biases_.emplace_back(fan_out, 0.0);
  }
  return net;
}

std::vector<double> Network::forward(const std::vector<double>& input) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw DimensionError("network forward: input size mismatch");
  std::vector<double> act = input;
  for (int l = 0; l < n_layers(); ++l) {
    const DenseMatrix& w = weights_[l];
    std::vector<double> next(w.rows);
    for (int i = 0; i < w.rows; ++i) {
      double s = biases_[l][i];
      for (int j = 0; j < w.cols; ++j) s += w(i, j) * act[j];
      next[i] = (l + 1 < n_layers()) ? softplus(s) : s;  // affine output layer
    }
    act = std::move(next);
  }
  return act;
}

double Network::loss_and_gradient(const DenseMatrix& inputs,
                                  const DenseMatrix& targets,
                                  std::vector<DenseMatrix>* grad_w,
                                  std::vector<std::vector<double>>* grad_b) const {
  if (inputs.rows != targets.rows)
    throw DimensionError("network loss: sample count mismatch");
  if (inputs.cols != input_dim() || targets.cols != output_dim())
    throw DimensionError("network loss: feature size mismatch");
  const int n_samples = inputs.rows;
  const int layers = n_layers();

  if (grad_w) {
    grad_w->clear();
    grad_b->clear();
    for (int l = 0; l < layers; ++l) {
      grad_w->emplace_back(weights_[l].rows, weights_[l].cols);
      grad_b->emplace_back(weights_[l].rows, 0.0);
    }
  }

  const double inv = 1.0 / (static_cast<double>(n_samples) * output_dim());
  double loss = 0.0;
  std::vector<std::vector<double>> acts(layers + 1), pre(layers);
  for (int s = 0; s < n_samples; ++s) {
    acts[0].assign(inputs.a.begin() + static_cast<size_t>(s) * inputs.cols,
                   inputs.a.begin() + static_cast<size_t>(s + 1) * inputs.cols);
    for (int l = 0; l < layers; ++l) {
      const DenseMatrix& w = weights_[l];
      pre[l].assign(w.rows, 0.0);
      acts[l + 1].assign(w.rows, 0.0);
      for (int i = 0; i < w.rows; ++i) {
        double z = biases_[l][i];
        for (int j = 0; j < w.cols; ++j) z += w(i, j) * acts[l][j];
        pre[l][i] = z;
        acts[l + 1][i] = (l + 1 < layers) ? softplus(z) : z;
      }
    }
    std::vector<double> delta(output_dim());
    for (int o = 0; o < output_dim(); ++o) {
      const double diff = acts[layers][o] - targets(s, o);
      loss += diff * diff * inv;
      delta[o] = 2.0 * diff * inv;
    }
    if (!grad_w) continue;
    for (int l = layers - 1; l >= 0; --l) {
      const DenseMatrix& w = weights_[l];
      for (int i = 0; i < w.rows; ++i) {
        (*grad_b)[l][i] += delta[i];
        for (int j = 0; j < w.cols; ++j) (*grad_w)[l](i, j) += delta[i] * acts[l][j];
      }
      if (l == 0) break;
      std::vector<double> prev(w.cols, 0.0);
      for (int j = 0; j < w.cols; ++j) {
        double s_back = 0.0;
        for (int i = 0; i < w.rows; ++i) s_back += w(i, j) * delta[i];
        prev[j] = s_back * softplus_derivative(pre[l - 1][j]);
      }
      delta = std::move(prev);
    }
  }
  return loss;
}

double Network::loss(const DenseMatrix& inputs, const DenseMatrix& targets) const {
  return loss_and_gradient(inputs, targets, nullptr, nullptr);
}

TrainHistory train_network(Network& net, const std::vector<double>& t_samples,
                           const DenseMatrix& targets, const NetworkConfig& cfg,
                           Normalization& norm) {
  cfg.validate();
  const int n = static_cast<int>(t_samples.size());
  if (n < 2) throw DimensionError("train: need at least two samples");
  if (targets.rows != n) throw DimensionError("train: sample count mismatch");
  const int n_out = targets.cols;
  if (net.input_dim() != 1 || net.output_dim() != n_out)
    throw DimensionError("train: network shape does not fit the samples");

  // Zero-mean unit-scale normalization from the full sample set; a guard keeps
  // constant targets well defined.
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    double sd = std::sqrt(var / v.size());
    return std::pair<double, double>(mean, sd > 1e-300 ? sd : 1.0);
  };
  std::tie(norm.t_mean, norm.t_scale) = stats(t_samples);
  norm.y_mean.assign(n_out, 0.0);
  norm.y_scale.assign(n_out, 1.0);
  for (int o = 0; o < n_out; ++o) {
    std::vector<double> col(n);
    for (int s = 0; s < n; ++s) col[s] = targets(s, o);
    std::tie(norm.y_mean[o], norm.y_scale[o]) = stats(col);
  }

  // Seeded shuffle, then an 80/20-style split.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed ^ 0x5bf03635ull);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next() % static_cast<uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  int n_train = static_cast<int>(std::lround(cfg.train_fraction * n));
  n_train = std::clamp(n_train, 1, n - 1);

  TrainHistory hist;
  hist.train_indices.assign(order.begin(), order.begin() + n_train);
  hist.test_indices.assign(order.begin() + n_train, order.end());

  auto pack = [&](const std::vector<int>& idx, DenseMatrix& in, DenseMatrix& out) {
    in = DenseMatrix(static_cast<int>(idx.size()), 1);
    out = DenseMatrix(static_cast<int>(idx.size()), n_out);
    for (size_t r = 0; r < idx.size(); ++r) {
      in(static_cast<int>(r), 0) =
          (t_samples[idx[r]] - norm.t_mean) / norm.t_scale;
      for (int o = 0; o < n_out; ++o)
        out(static_cast<int>(r), o) =
            (targets(idx[r], o) - norm.y_mean[o]) / norm.y_scale[o];
    }
  };
  DenseMatrix train_in, train_out, test_in, test_out;
  pack(hist.train_indices, train_in, train_out);
  pack(hist.test_indices, test_in, test_out);

  std::vector<DenseMatrix> gw;
  std::vector<std::vector<double>> gb;
  hist.train_loss.reserve(cfg.epochs);
  hist.test_loss.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double ltrain = net.loss_and_gradient(train_in, train_out, &gw, &gb);
    if (!std::isfinite(ltrain))
      throw NumericalError("nn training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch));
    for (int l = 0; l < net.n_layers(); ++l) {
      DenseMatrix& w = net.weights()[l];
      for (size_t i = 0; i < w.a.size(); ++i)
        w.a[i] -= cfg.learning_rate * gw[l].a[i];
      for (size_t i = 0; i < net.biases()[l].size(); ++i)
        net.biases()[l][i] -= cfg.learning_rate * gb[l][i];
    }
    hist.train_loss.push_back(ltrain);
    hist.test_loss.push_back(net.loss(test_in, test_out));
  }
  return hist;
}

double gradient_check(const Network& net, const std::vector<double>& input,
                      const std::vector<double>& target, double step) {
  DenseMatrix in(1, static_cast<int>(input.size()));
  DenseMatrix out(1, static_cast<int>(target.size()));
  in.a = input;
  out.a = target;

  std::vector<DenseMatrix> gw;
  std::vector<std::vector<double>> gb;
  Network probe = net;
  probe.loss_and_gradient(in, out, &gw, &gb);

  double worst = 0.0;
  auto compare = [&](double analytic, double* param) {
    const double saved = *param;
    *param = saved + step;
    const double lp = probe.loss(in, out);
    *param = saved - step;
    const double lm = probe.loss(in, out);
    *param = saved;
    const double fd = (lp - lm) / (2.0 * step);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    worst = std::max(worst, std::abs(analytic - fd) / denom);
  };
  for (int l = 0; l < probe.n_layers(); ++l) {
    DenseMatrix& w = probe.weights()[l];
    for (size_t i = 0; i < w.a.size(); ++i) compare(gw[l].a[i], &w.a[i]);
    for (size_t i = 0; i < probe.biases()[l].size(); ++i)
      compare(gb[l][i], &probe.biases()[l][i]);
  }
  return worst;
}

std::vector<double> OutflowModel::predict(double t, bool* extrapolated) const {
  if (extrapolated) {
    const double span = std::max(t_max - t_min, 1e-300);
    *extrapolated = (t < t_min - 1e-9 * span) || (t > t_max + 1e-9 * span);
  }
  const double tn = (t - norm.t_mean) / norm.t_scale;
  std::vector<double> out(n_outlets, 0.0);
  if (nets.size() == 1 && nets[0].output_dim() == n_outlets) {
    const std::vector<double> y = nets[0].forward({tn});
    for (int o = 0; o < n_outlets; ++o)
      out[o] = y[o] * norm.y_scale[o] + norm.y_mean[o];
  } else {
    for (int o = 0; o < n_outlets; ++o) {
      const std::vector<double> y = nets[o].forward({tn});
      out[o] = y[0] * norm.y_scale[o] + norm.y_mean[o];
    }
  }
  return out;
}

void OutflowModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path.string());
  out << "ROMNN v1\n";
  out << "outlets " << n_outlets << " networks " << nets.size() << '\n';
  out << "tnorm " << fmt17(norm.t_mean) << ' ' << fmt17(norm.t_scale) << '\n';
  out << "trange " << fmt17(t_min) << ' ' << fmt17(t_max) << '\n';
  for (int o = 0; o < n_outlets; ++o)
    out << "ynorm " << o << ' ' << fmt17(norm.y_mean[o]) << ' '
        << fmt17(norm.y_scale[o]) << '\n';
  for (const Network& net : nets) {
    out << "network";
    for (int s : net.layer_sizes()) out << ' ' << s;
    out << '\n';
    for (int l = 0; l < net.n_layers(); ++l) {
      const DenseMatrix& w = net.weights()[l];
      out << "layer " << l << '\n';
      for (int i = 0; i < w.rows; ++i) {
        for (int j = 0; j < w.cols; ++j) out << (j ? " " : "") << fmt17(w(i, j));
        out << '\n';
      }
      for (size_t i = 0; i < net.biases()[l].size(); ++i)
        out << (i ? " " : "") << fmt17(net.biases()[l][i]);
      out << '\n';
    }
  }
}

OutflowModel OutflowModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model file: " + path.string());
  std::string magic, version, word;
  in >> magic >> version;
  if (magic != "ROMNN" || version != "v1")
    throw IoError("bad ROMNN header in " + path.string());
  OutflowModel m;
  size_t n_nets = 0;
  in >> word >> m.n_outlets >> word >> n_nets;
  in >> word >> m.norm.t_mean >> m.norm.t_scale;
  in >> word >> m.t_min >> m.t_max;
  m.norm.y_mean.assign(m.n_outlets, 0.0);
  m.norm.y_scale.assign(m.n_outlets, 1.0);
  for (int o = 0; o < m.n_outlets; ++o) {
    int idx;
    in >> word >> idx >> m.norm.y_mean[o] >> m.norm.y_scale[o];
  }
  for (size_t k = 0; k < n_nets; ++k) {
    in >> word;  // "network"
    if (word != "network") throw IoError("bad model file: " + path.string());
    std::vector<int> sizes;
    std::string line;
    std::getline(in, line);
    {
      std::istringstream ls(line);
      int s;
      while (ls >> s) sizes.push_back(s);
    }
    Network net = Network::create(sizes, 0);
    for (int l = 0; l < net.n_layers(); ++l) {
      int idx;
      in >> word >> idx;  // "layer l"
      DenseMatrix& w = net.weights()[l];
      for (double& v : w.a)
        if (!(in >> v)) throw IoError("truncated model file: " + path.string());
      for (double& v : net.biases()[l])
        if (!(in >> v)) throw IoError("truncated model file: " + path.string());
    }
    m.nets.push_back(std::move(net));
  }
  if (!in) throw IoError("truncated model file: " + path.string());
  return m;
}

OutflowModel fit_outflow_model(const std::vector<double>& times,
                               const DenseMatrix& g_p, const NetworkConfig& cfg,
                               bool per_outlet, TrainHistory* history) {
  if (times.size() < 2) throw DimensionError("fit_outflow_model: need >= 2 samples");
  OutflowModel model;
  model.n_outlets = g_p.cols;
  model.t_min = *std::min_element(times.begin(), times.end());
  model.t_max = *std::max_element(times.begin(), times.end());

  std::vector<int> hidden(cfg.hidden_layers, cfg.neurons);
  auto layer_sizes = [&](int out_dim) {
    std::vector<int> s{1};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out_dim);
    return s;
  };

  if (!per_outlet) {
    Network net = Network::create(layer_sizes(g_p.cols), cfg.seed);
    TrainHistory h = train_network(net, times, g_p, cfg, model.norm);
    if (history) *history = h;
    model.nets.push_back(std::move(net));
  } else {
    Normalization merged;
    merged.y_mean.assign(g_p.cols, 0.0);
    merged.y_scale.assign(g_p.cols, 1.0);
    for (int o = 0; o < g_p.cols; ++o) {
      DenseMatrix col(g_p.rows, 1);
      for (int s = 0; s < g_p.rows; ++s) col(s, 0) = g_p(s, o);
      Network net = Network::create(layer_sizes(1), cfg.seed + o);
      Normalization norm;
      TrainHistory h = train_network(net, times, col, cfg, norm);
      if (history && o == 0) *history = h;
      merged.t_mean = norm.t_mean;
      merged.t_scale = norm.t_scale;
      merged.y_mean[o] = norm.y_mean[0];
      merged.y_scale[o] = norm.y_scale[0];
      model.nets.push_back(std::move(net));
    }
    model.norm = merged;
  }
  return model;
}

}  // namespace hemorom
