#pragma once

// Seeded ReLU multilayer perceptron with plain mini-batch SGD. Small enough
// to train at desk scale, deterministic given its seeds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"

namespace harsanyi {

enum class Loss { kMse, kCrossEntropy };

struct MlpConfig {
  // Input width, hidden widths..., output width.
  std::vector<int> widths;
  std::uint64_t seed = 0;
  // Multiplies the He-uniform bound sqrt(6 / fan_in).
  double init_scale = 1.0;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

class MlpModel {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.size() < 2) {
      throw DimensionError("an MLP needs at least one hidden layer");
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      if (layer.weights.rows() < 1 || layer.weights.cols() < 1 ||
          layer.bias.size() != layer.weights.rows()) {
        throw DimensionError("layer " + std::to_string(l) +
                             " has inconsistent shapes");
      }
      if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
        throw DimensionError("layer " + std::to_string(l) +
                             " input width does not match previous output");
      }
    }
  }

  int input_size() const { return static_cast<int>(layers_.front().weights.cols()); }
  int output_size() const { return static_cast<int>(layers_.back().weights.rows()); }
  std::size_t layer_count() const { return layers_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  std::vector<int> widths() const {
    std::vector<int> w{input_size()};
    for (const auto& layer : layers_) w.push_back(static_cast<int>(layer.weights.rows()));
    return w;
  }

  // Raw output (regression value or class logits) for one input.
  Eigen::VectorXd forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_size()) {
      throw DimensionError("input has " + std::to_string(x.size()) +
                           " components, model expects " +
                           std::to_string(input_size()));
    }
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::VectorXd z = layers_[l].weights * h + layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
      h = std::move(z);
    }
    return h;
  }

  // Columns of `inputs` are samples; returns outputs column-wise.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != input_size()) {
      throw DimensionError("batch rows do not match model input width");
    }
    Eigen::MatrixXd h = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::MatrixXd z = layers_[l].weights * h;
      z.colwise() += layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
      h = std::move(z);
    }
    return h;
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l) {
      const auto& x = a.layers_[l];
      const auto& y = b.layers_[l];
      if (x.weights.rows() != y.weights.rows() || x.weights.cols() != y.weights.cols() ||
          x.weights != y.weights || x.bias != y.bias) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<DenseLayer> layers_;
};

inline MlpModel init_model(const MlpConfig& config) {
  if (config.widths.size() < 3) {
    throw DimensionError("MLP config needs input, >=1 hidden, and output widths");
  }
  for (int w : config.widths) {
    if (w < 1) throw DimensionError("MLP widths must be >= 1");
  }
  std::mt19937_64 rng(config.seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < config.widths.size(); ++l) {
    const int in = config.widths[l];
    const int out = config.widths[l + 1];
    const double bound = config.init_scale * std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weights(r, c) = dist(rng);
    }
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

// log(p / (1 - p)) for the softmax probability of `truth`, computed as
// z_truth - logsumexp_{j != truth} z_j.
inline double logit_value(const Eigen::VectorXd& logits, int truth) {
  if (truth < 0 || truth >= logits.size()) {
    throw DimensionError("class index out of range");
  }
  if (logits.size() == 1) return logits[0];
  double top = -INFINITY;
  for (int j = 0; j < logits.size(); ++j) {
    if (j != truth) top = std::max(top, logits[j]);
  }
  double sum = 0.0;
  for (int j = 0; j < logits.size(); ++j) {
    if (j != truth) sum += std::exp(logits[j] - top);
  }
  return logits[truth] - (top + std::log(sum));
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

namespace detail {

// Forward pass keeping post-activation values of every layer.
inline std::vector<Eigen::MatrixXd> forward_trace(const MlpModel& model,
                                                  const Eigen::MatrixXd& inputs) {
  const auto& layers = model.layers();
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = layers[l].weights * acts.back();
    z.colwise() += layers[l].bias;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

inline Gradients backward(const MlpModel& model,
                          const std::vector<Eigen::MatrixXd>& acts,
                          Eigen::MatrixXd delta) {
  const auto& layers = model.layers();
  Gradients g;
  g.weights.resize(layers.size());
  g.bias.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.bias[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers[l].weights.transpose() * delta;
      // ReLU derivative; acts[l] is the post-activation of layer l-1.
      delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

}  // namespace detail

// Mean over columns of ||v(x) - y||^2. `targets` is output_size x batch.
inline double mse_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, Gradients* grad = nullptr) {
  if (targets.rows() != model.output_size() || targets.cols() != inputs.cols()) {
    throw DimensionError("target shape does not match model output / batch");
  }
  const auto acts = detail::forward_trace(model, inputs);
  const Eigen::MatrixXd diff = acts.back() - targets;
  const double batch = static_cast<double>(inputs.cols());
  const double loss = diff.squaredNorm() / batch;
  if (grad) *grad = detail::backward(model, acts, (2.0 / batch) * diff);
  return loss;
}

// Mean softmax cross-entropy against integer labels.
inline double cross_entropy_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                                 std::span<const int> labels,
                                 Gradients* grad = nullptr) {
  if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) {
    throw DimensionError("label count does not match batch size");
  }
  const auto acts = detail::forward_trace(model, inputs);
  const Eigen::MatrixXd& logits = acts.back();
  const double batch = static_cast<double>(inputs.cols());
  Eigen::MatrixXd delta(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const int y = labels[c];
    if (y < 0 || y >= logits.rows()) throw DimensionError("label out of range");
    const double top = logits.col(c).maxCoeff();
    const Eigen::ArrayXd e = (logits.col(c).array() - top).exp();
    const double sum = e.sum();
    loss += -(logits(y, c) - top - std::log(sum));
    delta.col(c) = (e / sum).matrix();
    delta(y, c) -= 1.0;
  }
  delta /= batch;
  if (grad) *grad = detail::backward(model, acts, std::move(delta));
  return loss / batch;
}

// Backprop against central differences over every parameter:
// ||g_bp - g_fd|| / max(||g_bp|| + ||g_fd||, tiny). Labels select
// cross-entropy, otherwise MSE against `targets`.
inline double gradient_check(const MlpModel& model, const Eigen::MatrixXd& inputs,
                             const Eigen::MatrixXd& targets, std::span<const int> labels,
                             double h = 1e-5) {
  const bool classify = !labels.empty();
  auto loss = [&](const MlpModel& m, Gradients* g) {
    return classify ? cross_entropy_loss(m, inputs, labels, g) : mse_loss(m, inputs, targets, g);
  };
  Gradients analytic;
  loss(model, &analytic);
  MlpModel probe = model;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  auto visit = [&](double& param, double grad) {
    const double saved = param;
    param = saved + h;
    const double up = loss(probe, nullptr);
    param = saved - h;
    const double down = loss(probe, nullptr);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    diff2 += (grad - numeric) * (grad - numeric);
    a2 += grad * grad;
    n2 += numeric * numeric;
  };
  auto& layers = probe.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (Eigen::Index i = 0; i < layers[l].weights.size(); ++i) {
      visit(layers[l].weights.data()[i], analytic.weights[l].data()[i]);
    }
    for (Eigen::Index i = 0; i < layers[l].bias.size(); ++i) {
      visit(layers[l].bias[i], analytic.bias[l][i]);
    }
  }
  return std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-300);
}

// Rows of the dataset are columns of `inputs`. Regression datasets fill
// `targets`; classification datasets fill `labels` and `classes`.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  std::vector<int> labels;
  int classes = 0;

  Eigen::Index rows() const { return inputs.cols(); }
  bool is_classification() const { return classes > 0; }
};

// u_{S*}(x) = prod_{i in S*} x_i on binary rows.
class AndConcept {
 public:
  explicit AndConcept(VariableSet target) : target_(target) {
    if (target.mask() == 0) throw DimensionError("AND concept needs a nonempty set");
  }
  double operator()(Mask row) const {
    return (row & target_.mask()) == target_.mask() ? 1.0 : 0.0;
  }
  const VariableSet& target() const { return target_; }

 private:
  VariableSet target_;
};

inline AndConcept and_concept_target(const VariableSet& target) {
  return AndConcept(target);
}

// Every row of {0,1}^n (row index == mask, bit i -> feature i), regression
// targets from `target_fn`.
template <typename Concept>
Dataset make_boolean_cube(int n, const Concept& target_fn) {
  check_variable_count(n);
  const auto size = static_cast<Eigen::Index>(table_size(n));
  Dataset d;
  d.inputs.resize(n, size);
  d.targets.resize(1, size);
  for (Eigen::Index m = 0; m < size; ++m) {
    for (int i = 0; i < n; ++i) d.inputs(i, m) = ((m >> i) & 1) ? 1.0 : 0.0;
    d.targets(0, m) = target_fn(static_cast<Mask>(m));
  }
  return d;
}

// Replaces exactly ceil(rho * N) labels, chosen uniformly without
// replacement, with a label drawn uniformly from the other classes.
inline std::vector<int> apply_label_noise(std::span<const int> labels, int classes,
                                          double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DimensionError("label noise ratio outside [0,1]");
  std::vector<int> out(labels.begin(), labels.end());
  if (rho == 0.0) return out;
  if (classes < 2) throw DimensionError("label noise needs at least two classes");
  const std::size_t count = static_cast<std::size_t>(
      std::ceil(rho * static_cast<double>(out.size()) - 1e-9));
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<int> pick(0, classes - 2);
  for (std::size_t k = 0; k < count; ++k) {
    int& y = out[order[k]];
    const int r = pick(rng);
    y = r >= y ? r + 1 : r;
  }
  return out;
}

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 100;
  int batch_size = 32;
  Loss loss = Loss::kMse;
  // Epochs after which the model is copied; 0 means before training.
  std::vector<int> snapshot_epochs;
  double label_noise = 0.0;
  std::uint64_t noise_seed = 0;
  std::uint64_t shuffle_seed = 0;
};

class Snapshot {
 public:
  Snapshot(int epoch, MlpModel model) : epoch_(epoch), model_(std::move(model)) {}
  int epoch() const { return epoch_; }
  const MlpModel& model() const { return model_; }

 private:
  int epoch_;
  MlpModel model_;
};

struct TrainResult {
  MlpModel model;
  std::vector<Snapshot> snapshots;
  std::vector<double> epoch_loss;  // mean mini-batch loss per epoch
  std::vector<int> labels;         // labels actually trained on
};

inline TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& config) {
  if (data.rows() == 0) throw DimensionError("empty dataset");
  if (config.epochs < 0 || config.batch_size < 1 || !(config.learning_rate > 0.0)) {
    throw DimensionError("invalid training configuration");
  }
  if (!std::is_sorted(config.snapshot_epochs.begin(), config.snapshot_epochs.end())) {
    throw DimensionError("snapshot epochs must be sorted");
  }
  for (int e : config.snapshot_epochs) {
    if (e < 0 || e > config.epochs) throw DimensionError("snapshot epoch out of range");
  }
  const bool classify = config.loss == Loss::kCrossEntropy;
  if (classify && !data.is_classification()) {
    throw DimensionError("cross-entropy needs a labelled dataset");
  }
  if (!classify && data.targets.cols() != data.rows()) {
    throw DimensionError("MSE needs regression targets");
  }

  std::vector<int> labels;
  if (classify) {
    labels = apply_label_noise(data.labels, data.classes, config.label_noise,
                               config.noise_seed);
  }

  std::vector<Snapshot> snapshots;
  auto next_snapshot = config.snapshot_epochs.begin();
  auto take_snapshots = [&](int epoch) {
    while (next_snapshot != config.snapshot_epochs.end() && *next_snapshot == epoch) {
      if (snapshots.empty() || snapshots.back().epoch() != epoch) {
        snapshots.emplace_back(epoch, model);
      }
      ++next_snapshot;
    }
  };
  take_snapshots(0);

  const Eigen::Index rows = data.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(config.shuffle_seed);
  std::vector<double> epoch_loss;
  epoch_loss.reserve(static_cast<std::size_t>(config.epochs));

  Eigen::MatrixXd batch_x;
  Eigen::MatrixXd batch_y;
  std::vector<int> batch_labels;
  Gradients grad;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < rows; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, rows - start);
      batch_x.resize(data.inputs.rows(), len);
      for (Eigen::Index k = 0; k < len; ++k) {
        batch_x.col(k) = data.inputs.col(order[start + k]);
      }
      double loss = 0.0;
      if (classify) {
        batch_labels.resize(static_cast<std::size_t>(len));
        for (Eigen::Index k = 0; k < len; ++k) batch_labels[k] = labels[order[start + k]];
        loss = cross_entropy_loss(model, batch_x, batch_labels, &grad);
      } else {
        batch_y.resize(data.targets.rows(), len);
        for (Eigen::Index k = 0; k < len; ++k) {
          batch_y.col(k) = data.targets.col(order[start + k]);
        }
        loss = mse_loss(model, batch_x, batch_y, &grad);
      }
      if (!std::isfinite(loss)) {
        throw TrainingError(epoch, "non-finite loss at epoch " + std::to_string(epoch));
      }
      total += loss * static_cast<double>(len);
      seen += len;
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= config.learning_rate * grad.weights[l];
        layers[l].bias -= config.learning_rate * grad.bias[l];
      }
    }
    epoch_loss.push_back(total / static_cast<double>(seen));
    take_snapshots(epoch);
  }
  return TrainResult{std::move(model), std::move(snapshots), std::move(epoch_loss),
                     std::move(labels)};
}

// --- JSON weight file -------------------------------------------------------
//
// {"format": "harsanyi-mlp", "version": 1, "widths": [...],
//  "layers": [{"rows": r, "cols": c, "weights": [row-major r*c],
//              "bias": [r]}, ...]}

inline nlohmann::json model_to_json(const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weights.size()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) w.push_back(layer.weights(r, c));
    }
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back({{"rows", layer.weights.rows()},
                      {"cols", layer.weights.cols()},
                      {"weights", std::move(w)},
                      {"bias", std::move(b)}});
  }
  return {{"format", "harsanyi-mlp"},
          {"version", 1},
          {"widths", model.widths()},
          {"layers", std::move(layers)}};
}

inline MlpModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "harsanyi-mlp" || j.at("version").get<int>() != 1) {
      throw FormatError("not a harsanyi-mlp v1 document");
    }
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      const auto rows = jl.at("rows").get<Eigen::Index>();
      const auto cols = jl.at("cols").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows) {
        throw FormatError("layer arrays do not match declared shape");
      }
      DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[r * cols + c];
        layer.bias[r] = b[r];
      }
      layers.push_back(std::move(layer));
    }
    return MlpModel(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("inconsistent model document: ") + e.what());
  }
}

inline void save_model(const std::string& path, const MlpModel& model) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << model_to_json(model).dump() << '\n';
  if (!out) throw FormatError("failed writing " + path);
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cannot parse " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace harsanyi
