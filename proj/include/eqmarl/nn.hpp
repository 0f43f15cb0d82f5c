// Copyright 2026 The eQMARL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EQMARL_NN_HPP
#define EQMARL_NN_HPP

// Small classical network kit: parameter blocks, dense layers with
// hand-written backprop, the Huber and entropy-regularized advantage losses,
// and Adam.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eqmarl {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [0, n) without modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// A named trainable tensor with its gradient accumulator.
struct ParameterBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  double learning_rate = 1e-3;

  ParameterBlock() = default;
  ParameterBlock(std::string n, std::vector<std::size_t> s, double fill = 0.0)
      : name(std::move(n)), shape(std::move(s)) {
    const std::size_t count =
        std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    value.assign(count, fill);
    grad.assign(count, 0.0);
  }

  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

using ParameterList = std::vector<ParameterBlock*>;

inline std::size_t count_parameters(const ParameterList& blocks) {
  std::size_t n = 0;
  for (const auto* b : blocks) n += b->size();
  return n;
}

inline void zero_grads(const ParameterList& blocks) {
  for (auto* b : blocks) b->zero_grad();
}

enum class Activation { Linear, ReLU, Softmax };

/// Numerically stable softmax.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - m).exp();
  return e / e.sum();
}

struct DenseCache {
  Eigen::VectorXd input;
  Eigen::VectorXd pre;
  Eigen::VectorXd out;
};

class DenseLayer {
 public:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  DenseLayer() = default;
  DenseLayer(int in, int out, Activation act, const std::string& name)
      : in_(in),
        out_(out),
        act_(act),
        weights_(name + ".kernel", {static_cast<std::size_t>(out), static_cast<std::size_t>(in)}),
        bias_(name + ".bias", {static_cast<std::size_t>(out)}) {
    if (in < 1 || out < 1) throw std::invalid_argument("dense layer dimensions must be positive");
  }

  int in() const { return in_; }
  int out() const { return out_; }
  Activation activation() const { return act_; }
  int parameter_count() const { return out_ * (in_ + 1); }

  ParameterBlock& weights() { return weights_; }
  ParameterBlock& bias() { return bias_; }
  const ParameterBlock& weights() const { return weights_; }
  const ParameterBlock& bias() const { return bias_; }

  /// Glorot-uniform kernel, zero bias.
  void init_glorot(Rng& rng) {
    const double limit = std::sqrt(6.0 / (in_ + out_));
    for (auto& w : weights_.value) w = uniform(rng, -limit, limit);
    std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
  }

  Eigen::Map<const RowMajor> w() const { return {weights_.value.data(), out_, in_}; }
  Eigen::Map<const Eigen::VectorXd> b() const { return {bias_.value.data(), out_}; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x, DenseCache* cache = nullptr) const {
    if (x.size() != in_) {
      throw std::invalid_argument(weights_.name + ": expected input of size " + std::to_string(in_) + ", got " +
                                  std::to_string(x.size()));
    }
    Eigen::VectorXd pre = w() * x + b();
    Eigen::VectorXd y;
    switch (act_) {
      case Activation::Linear: y = pre; break;
      case Activation::ReLU: y = pre.cwiseMax(0.0); break;
      case Activation::Softmax: y = softmax(pre); break;
    }
    if (cache) {
      cache->input = x;
      cache->pre = pre;
      cache->out = y;
    }
    return y;
  }

  /// Accumulates dL/dW, dL/db from dL/d(output) and returns dL/d(input).
  Eigen::VectorXd backward(const DenseCache& cache, const Eigen::VectorXd& dout) {
    Eigen::VectorXd dpre;
    switch (act_) {
      case Activation::Linear: dpre = dout; break;
      case Activation::ReLU: dpre = (cache.pre.array() > 0.0).select(dout, 0.0); break;
      case Activation::Softmax: {
        const double dot = cache.out.dot(dout);
        dpre = cache.out.array() * (dout.array() - dot);
        break;
      }
    }
    Eigen::Map<RowMajor> gw(weights_.grad.data(), out_, in_);
    Eigen::Map<Eigen::VectorXd> gb(bias_.grad.data(), out_);
    gw.noalias() += dpre * cache.input.transpose();
    gb += dpre;
    return w().transpose() * dpre;
  }

  void append_parameters(ParameterList& out) {
    out.push_back(&weights_);
    out.push_back(&bias_);
  }

 private:
  int in_ = 0;
  int out_ = 0;
  Activation act_ = Activation::Linear;
  ParameterBlock weights_;
  ParameterBlock bias_;
};

// ---------------------------------------------------------------------------
// Losses

inline constexpr double kProbabilityFloor = 1e-8;

inline double clamp_probability(double p) { return std::max(p, kProbabilityFloor); }

/// Mean Huber loss; quadratic for |err| <= delta, linear beyond.
inline double huber_loss(std::span<const double> predicted, std::span<const double> target, double delta = 1.0) {
  if (predicted.empty()) throw std::invalid_argument("huber_loss on empty input");
  if (predicted.size() != target.size()) throw std::invalid_argument("huber_loss length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = std::abs(predicted[i] - target[i]);
    total += e <= delta ? 0.5 * e * e : delta * e - 0.5 * delta * delta;
  }
  return total / static_cast<double>(predicted.size());
}

/// d(huber_loss)/d(predicted) for every entry.
inline std::vector<double> huber_gradient(std::span<const double> predicted, std::span<const double> target,
                                          double delta = 1.0) {
  if (predicted.empty()) throw std::invalid_argument("huber_gradient on empty input");
  if (predicted.size() != target.size()) throw std::invalid_argument("huber_gradient length mismatch");
  std::vector<double> g(predicted.size());
  const double inv = 1.0 / static_cast<double>(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    g[i] = std::clamp(predicted[i] - target[i], -delta, delta) * inv;
  }
  return g;
}

/// One term of the actor loss: -A ln p + alpha * (-p ln p), p = chosen-action probability.
inline double actor_loss_term(double advantage, double p, double alpha) {
  const double pc = clamp_probability(p);
  const double lp = std::log(pc);
  return -advantage * lp + alpha * (-pc * lp);
}

/// d(actor_loss_term)/dp; zero below the clamp floor.
inline double actor_loss_term_dp(double advantage, double p, double alpha) {
  if (p < kProbabilityFloor) return 0.0;
  return -advantage / p + alpha * (-std::log(p) - 1.0);
}

/// Mean of actor_loss_term over aligned (advantage, probability) pairs.
inline double actor_loss(std::span<const double> advantages, std::span<const double> probs, double alpha) {
  if (advantages.empty()) throw std::invalid_argument("actor_loss on empty input");
  if (advantages.size() != probs.size()) throw std::invalid_argument("actor_loss length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < advantages.size(); ++i) total += actor_loss_term(advantages[i], probs[i], alpha);
  return total / static_cast<double>(advantages.size());
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// Bias-corrected Adam. Moments are created lazily on the first step and are
/// tied to the order of the parameter list.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  int steps() const { return step_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

  void step(const ParameterList& blocks) {
    if (m_.empty()) {
      for (const auto* b : blocks) {
        m_.emplace_back(b->size(), 0.0);
        v_.emplace_back(b->size(), 0.0);
      }
    }
    if (m_.size() != blocks.size()) throw std::logic_error("Adam parameter list changed between steps");
    for (const auto* b : blocks) {
      for (double g : b->grad) {
        if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient in parameter block '" + b->name + "'");
      }
    }
    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, step_);
    const double c2 = 1.0 - std::pow(config_.beta2, step_);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      auto* b = blocks[k];
      if (m_[k].size() != b->size()) throw std::logic_error("Adam moment shape mismatch for " + b->name);
      for (std::size_t i = 0; i < b->size(); ++i) {
        const double g = b->grad[i];
        m_[k][i] = config_.beta1 * m_[k][i] + (1.0 - config_.beta1) * g;
        v_[k][i] = config_.beta2 * v_[k][i] + (1.0 - config_.beta2) * g * g;
        const double mhat = m_[k][i] / c1;
        const double vhat = v_[k][i] / c2;
        b->value[i] -= b->learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
      }
    }
  }

 private:
  AdamConfig config_;
  int step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// ---------------------------------------------------------------------------
// Checkpoints: {"format": ..., "tensors": [{"name", "shape", "values"}, ...]}

inline constexpr const char* kCheckpointFormat = "eqmarl-checkpoint/1";

inline nlohmann::json parameters_to_json(const ParameterList& blocks) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto* b : blocks) {
    tensors.push_back({{"name", b->name}, {"shape", b->shape}, {"values", b->value}});
  }
  return {{"format", kCheckpointFormat}, {"tensors", tensors}};
}

inline void parameters_from_json(const nlohmann::json& j, const ParameterList& blocks) {
  if (j.value("format", "") != kCheckpointFormat) throw std::runtime_error("unrecognized checkpoint format");
  const auto& tensors = j.at("tensors");
  if (tensors.size() != blocks.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model has " +
                             std::to_string(blocks.size()));
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& t = tensors[i];
    auto* b = blocks[i];
    if (t.at("name").get<std::string>() != b->name) {
      throw std::runtime_error("checkpoint tensor '" + t.at("name").get<std::string>() + "' where '" + b->name +
                               "' was expected");
    }
    if (t.at("shape").get<std::vector<std::size_t>>() != b->shape) {
      throw std::runtime_error("shape mismatch for tensor '" + b->name + "'");
    }
    b->value = t.at("values").get<std::vector<double>>();
  }
}

}  // namespace eqmarl

#endif  // EQMARL_NN_HPP
