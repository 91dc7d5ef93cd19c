#pragma once

// Small dense multilayer perceptrons with ReLU hidden layers, an optional
// L2-normalized output head, reverse-mode gradients and Adam.
//
// Batches are column-major: each column of an input matrix is one sample.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "visr/error.hpp"
#include "visr/rng.hpp"

namespace visr::nn {

enum class OutputHead { linear, l2_normalized };

// Inputs whose pre-normalization output is shorter than this cannot be projected.
inline constexpr double kMinNormalizableNorm = 1e-12;

inline std::string to_string(OutputHead head) {
  return head == OutputHead::linear ? "linear" : "l2_normalized";
}

inline OutputHead output_head_from_string(const std::string& s) {
  if (s == "linear") return OutputHead::linear;
  if (s == "l2_normalized") return OutputHead::l2_normalized;
  throw ConfigError("unknown output head '" + s + "'");
}

/// Weights and biases for every layer. Also used for gradients and Adam moments.
struct Parameters {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Parameters zeros(const std::vector<int>& layer_dims) {
    Parameters p;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
      p.weights.push_back(Eigen::MatrixXd::Zero(layer_dims[l + 1], layer_dims[l]));
      p.biases.push_back(Eigen::VectorXd::Zero(layer_dims[l + 1]));
    }
    return p;
  }

  std::size_t num_layers() const { return weights.size(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  bool same_shape(const Parameters& other) const {
    if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != other.weights[l].rows() || weights[l].cols() != other.weights[l].cols() ||
          biases[l].size() != other.biases[l].size())
        return false;
    }
    return true;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
  }

  /// Per layer: W in row-major order, then b.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const auto& w = weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
      for (Eigen::Index i = 0; i < biases[l].size(); ++i) out.push_back(biases[l](i));
    }
    return out;
  }

  void unflatten(const std::vector<double>& flat) {
    if (flat.size() != size())
      throw DimensionError("flattened parameter count " + std::to_string(flat.size()) + " != " +
                           std::to_string(size()));
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      auto& w = weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
      for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l](i) = flat[k++];
    }
  }

  /// Mutable access to scalar coordinate `index` in flatten() order.
  double& coordinate(std::size_t index) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const auto nw = static_cast<std::size_t>(weights[l].size());
      if (index < nw) {
        const auto cols = static_cast<std::size_t>(weights[l].cols());
        return weights[l](static_cast<Eigen::Index>(index / cols), static_cast<Eigen::Index>(index % cols));
      }
      index -= nw;
      const auto nb = static_cast<std::size_t>(biases[l].size());
      if (index < nb) return biases[l](static_cast<Eigen::Index>(index));
      index -= nb;
    }
    throw DimensionError("parameter coordinate out of range");
  }

  double coordinate(std::size_t index) const { return const_cast<Parameters&>(*this).coordinate(index); }
};

class Mlp {
 public:
  /// Zero-initialized network.
  Mlp(std::vector<int> layer_dims, OutputHead head) : dims_(std::move(layer_dims)), head_(head) {
    if (dims_.size() < 2) throw DimensionError("an Mlp needs at least input and output dimensions");
    for (int d : dims_)
      if (d <= 0) throw DimensionError("layer dimensions must be positive");
    params_ = Parameters::zeros(dims_);
  }

  /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  static Mlp random(std::vector<int> layer_dims, OutputHead head, Rng& rng) {
    Mlp net(std::move(layer_dims), head);
    for (std::size_t l = 0; l < net.params_.num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      auto& w = net.params_.weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
      auto& b = net.params_.biases[l];
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = dist(rng);
    }
    return net;
  }

  const std::vector<int>& layer_dims() const { return dims_; }
  OutputHead head() const { return head_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }

  const Parameters& params() const { return params_; }
  Parameters& params() { return params_; }

 private:
  std::vector<int> dims_;
  OutputHead head_;
  Parameters params_;
};

/// Intermediate values needed by backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer (post-ReLU for l > 0)
  Eigen::MatrixXd pre_head;             // last linear layer output
  Eigen::MatrixXd output;
  Eigen::RowVectorXd norms;             // column norms of pre_head, l2 head only
};

inline ForwardCache forward_cached(const Mlp& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim())
    throw DimensionError("input length " + std::to_string(inputs.rows()) + " != " +
                         std::to_string(net.input_dim()));
  const auto& p = net.params();
  ForwardCache cache;
  cache.inputs.reserve(p.num_layers());
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    Eigen::MatrixXd z = p.weights[l] * a;
    z.colwise() += p.biases[l];
    cache.inputs.push_back(std::move(a));
    if (l + 1 < p.num_layers()) {
      a = z.cwiseMax(0.0);
    } else {
      cache.pre_head = std::move(z);
    }
  }
  if (net.head() == OutputHead::l2_normalized) {
    cache.norms = cache.pre_head.colwise().norm();
    for (Eigen::Index c = 0; c < cache.norms.size(); ++c) {
      if (!(cache.norms(c) >= kMinNormalizableNorm))
        throw NumericalError("cannot L2-normalize an output of norm " + std::to_string(cache.norms(c)));
    }
    cache.output = (cache.pre_head.array().rowwise() / cache.norms.array()).matrix();
  } else {
    cache.output = cache.pre_head;
  }
  return cache;
}

inline Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs) {
  return forward_cached(net, inputs).output;
}

inline Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input) {
  return forward_cached(net, input).output.col(0);
}

/// Gradient of sum over columns of (output . output_grad) with respect to all parameters.
inline Parameters backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& output_grad) {
  if (output_grad.rows() != net.output_dim() || output_grad.cols() != cache.output.cols())
    throw DimensionError("output gradient shape does not match forward output");
  const auto& p = net.params();
  Parameters grads = Parameters::zeros(net.layer_dims());

  Eigen::MatrixXd delta;
  if (net.head() == OutputHead::l2_normalized) {
    // d(z/|z|)/dz = (I - y y^T) / |z|
    const Eigen::RowVectorXd proj = (cache.output.array() * output_grad.array()).colwise().sum();
    delta = output_grad - cache.output * proj.asDiagonal();
    delta = (delta.array().rowwise() / cache.norms.array()).matrix();
  } else {
    delta = output_grad;
  }

  for (std::size_t l = p.num_layers(); l-- > 0;) {
    const auto& a = cache.inputs[l];
    grads.weights[l].noalias() = delta * a.transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = p.weights[l].transpose() * delta;
      delta = (a.array() > 0.0).select(back.array(), 0.0).matrix();
    }
  }
  return grads;
}

inline Parameters backward(const Mlp& net, const Eigen::VectorXd& input, const Eigen::VectorXd& output_grad) {
  const ForwardCache cache = forward_cached(net, input);
  return backward(net, cache, output_grad);
}

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  std::int64_t step = 0;
  double learning_rate = 1e-4;
  double epsilon = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;

  static AdamState for_net(const Mlp& net, double learning_rate, double epsilon) {
    AdamState s;
    s.first_moment = Parameters::zeros(net.layer_dims());
    s.second_moment = Parameters::zeros(net.layer_dims());
    s.learning_rate = learning_rate;
    s.epsilon = epsilon;
    return s;
  }
};

/// One bias-corrected Adam update.
inline void adam_step(Mlp& net, AdamState& state, const Parameters& grads) {
  auto& p = net.params();
  if (!grads.same_shape(p) || !state.first_moment.same_shape(p) || !state.second_moment.same_shape(p))
    throw DimensionError("adam_step: gradient or moment shapes do not match parameters");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double lr = state.learning_rate;
  const double eps = state.epsilon;

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    update(p.weights[l], state.first_moment.weights[l], state.second_moment.weights[l], grads.weights[l]);
    update(p.biases[l], state.first_moment.biases[l], state.second_moment.biases[l], grads.biases[l]);
  }
}

/// Frozen deep copy of a network's parameters (e.g. a target network).
class ParameterSnapshot {
 public:
  explicit ParameterSnapshot(const Mlp& source) : net_(source) {}

  const Mlp& net() const { return net_; }
  const Parameters& params() const { return net_.params(); }

 private:
  Mlp net_;
};

inline ParameterSnapshot snapshot(const Mlp& net) { return ParameterSnapshot(net); }

inline void load(Mlp& net, const ParameterSnapshot& snap) {
  if (net.layer_dims() != snap.net().layer_dims() || net.head() != snap.net().head())
    throw DimensionError("snapshot is not shape-compatible with the target network");
  net.params() = snap.params();
}

// Checkpoint format "visr-ckpt-1".

inline constexpr const char* kCheckpointVersion = "visr-ckpt-1";

inline nlohmann::json checkpoint_json(const Mlp& net, const AdamState& adam) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["layer_dims"] = net.layer_dims();
  j["output_head"] = to_string(net.head());
  j["parameters"] = net.params().flatten();
  j["adam"] = {
      {"step", adam.step},
      {"learning_rate", adam.learning_rate},
      {"epsilon", adam.epsilon},
      {"beta1", adam.beta1},
      {"beta2", adam.beta2},
      {"first_moment", adam.first_moment.flatten()},
      {"second_moment", adam.second_moment.flatten()},
  };
  return j;
}

inline std::pair<Mlp, AdamState> from_checkpoint_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<std::string>() != kCheckpointVersion)
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    Mlp net(j.at("layer_dims").get<std::vector<int>>(),
            output_head_from_string(j.at("output_head").get<std::string>()));
    net.params().unflatten(j.at("parameters").get<std::vector<double>>());
    const auto& a = j.at("adam");
    AdamState adam = AdamState::for_net(net, a.at("learning_rate").get<double>(), a.at("epsilon").get<double>());
    adam.step = a.at("step").get<std::int64_t>();
    adam.beta1 = a.at("beta1").get<double>();
    adam.beta2 = a.at("beta2").get<double>();
    adam.first_moment.unflatten(a.at("first_moment").get<std::vector<double>>());
    adam.second_moment.unflatten(a.at("second_moment").get<std::vector<double>>());
    if (adam.step < 0) throw ConfigError("negative Adam step count");
    return {std::move(net), std::move(adam)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed network checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("malformed network checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const Mlp& net, const AdamState& adam) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << checkpoint_json(net, adam).dump() << '\n';
}

inline std::pair<Mlp, AdamState> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  return from_checkpoint_json(j);
}

}  // namespace visr::nn
