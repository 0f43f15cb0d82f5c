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

#ifndef EQMARL_BRANCH_HPP
#define EQMARL_BRANCH_HPP

// One agent's quantum model input path: an optional linear encoder mapping a
// flattened observation to D x 3 features, followed by the agent's VQC
// parameters. Shared by the quantum critics and the quantum actor.

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eqmarl/nn.hpp"
#include "eqmarl/vqc.hpp"

namespace eqmarl {

/// What an agent hands to a model for one time step.
struct AgentObservation {
  /// Flattened observation; input to classical nets and to quantum encoders.
  std::vector<double> raw;
  /// Fixed D x 3 transform for encoder-free quantum models (rows == 0 if unused).
  ObservationMatrix matrix;
};

using JointObservation = std::vector<AgentObservation>;

/// Learning rates of one quantum branch, by parameter group.
struct BranchRates {
  double theta = 0.01;
  double lambda = 0.1;
  double encoder_weights = 0.1;
  double encoder_bias = 0.1;
};

class QuantumBranch {
 public:
  QuantumBranch() = default;

  /// `encoder_inputs` == 0 selects the encoder-free path with trainable lambda;
  /// otherwise a Linear encoder encoder_inputs -> 3D feeds the circuit and
  /// lambda is fixed to ones.
  QuantumBranch(const std::string& name, int qubits, int layers, int encoder_inputs, const BranchRates& rates)
      : qubits_(qubits),
        layers_(layers),
        theta_(name + ".theta", {static_cast<std::size_t>(layers + 1), static_cast<std::size_t>(qubits), 3}),
        lambda_(name + ".lambda", {static_cast<std::size_t>(layers), static_cast<std::size_t>(qubits), 3}, 1.0) {
    if (qubits < 1 || layers < 0) throw std::invalid_argument("quantum branch needs D >= 1 and L >= 0");
    theta_.learning_rate = rates.theta;
    lambda_.learning_rate = rates.lambda;
    if (encoder_inputs > 0) {
      encoder_.emplace(encoder_inputs, 3 * qubits, Activation::Linear, name + ".encoder");
      encoder_->weights().learning_rate = rates.encoder_weights;
      encoder_->bias().learning_rate = rates.encoder_bias;
    }
  }

  int qubits() const { return qubits_; }
  int layers() const { return layers_; }
  bool has_encoder() const { return encoder_.has_value(); }
  bool lambda_trainable() const { return !has_encoder(); }

  ParameterBlock& theta() { return theta_; }
  ParameterBlock& lambda() { return lambda_; }
  const ParameterBlock& theta() const { return theta_; }
  const ParameterBlock& lambda() const { return lambda_; }
  DenseLayer& encoder() { return encoder_.value(); }
  const DenseLayer& encoder() const { return encoder_.value(); }

  int parameter_count() const {
    return vqc_trainable_count(qubits_, layers_, lambda_trainable()) + (encoder_ ? encoder_->parameter_count() : 0);
  }

  /// Angles uniform in [0, pi), scales one, encoder Glorot.
  void init(Rng& rng) {
    for (auto& t : theta_.value) t = uniform(rng, 0.0, std::numbers::pi);
    std::fill(lambda_.value.begin(), lambda_.value.end(), 1.0);
    if (encoder_) encoder_->init_glorot(rng);
  }

  VqcParams params() const {
    VqcParams p;
    p.qubits = qubits_;
    p.layers = layers_;
    p.theta = theta_.value;
    p.lambda = lambda_.value;
    p.lambda_trainable = lambda_trainable();
    return p;
  }

  /// D x 3 circuit input for `obs`; fills `cache` when an encoder is present.
  ObservationMatrix encode(const AgentObservation& obs, DenseCache* cache = nullptr) const {
    if (!encoder_) {
      if (obs.matrix.rows != qubits_) {
        throw std::invalid_argument("observation matrix has " + std::to_string(obs.matrix.rows) +
                                    " rows, branch expects " + std::to_string(qubits_));
      }
      return obs.matrix;
    }
    const Eigen::Map<const Eigen::VectorXd> x(obs.raw.data(), static_cast<Eigen::Index>(obs.raw.size()));
    const Eigen::VectorXd y = encoder_->forward(x, cache);
    return ObservationMatrix::from(qubits_, std::vector<double>(y.data(), y.data() + y.size()));
  }

  /// Adds `weight * g` into the parameter gradients, backpropagating the
  /// observation part through the encoder when present.
  void accumulate(const VqcGradient& g, double weight, const DenseCache* cache = nullptr) {
    for (std::size_t i = 0; i < g.theta.size(); ++i) theta_.grad[i] += weight * g.theta[i];
    if (lambda_trainable()) {
      for (std::size_t i = 0; i < g.lambda.size(); ++i) lambda_.grad[i] += weight * g.lambda[i];
    }
    if (encoder_) {
      if (!cache) throw std::logic_error("encoder gradient needs the forward cache");
      Eigen::VectorXd dout(static_cast<Eigen::Index>(g.obs.size()));
      for (std::size_t i = 0; i < g.obs.size(); ++i) dout(static_cast<Eigen::Index>(i)) = weight * g.obs[i];
      encoder_->backward(*cache, dout);
    }
  }

  void append_parameters(ParameterList& out) {
    if (encoder_) encoder_->append_parameters(out);
    out.push_back(&theta_);
    if (lambda_trainable()) out.push_back(&lambda_);
  }

 private:
  int qubits_ = 0;
  int layers_ = 0;
  ParameterBlock theta_;
  ParameterBlock lambda_;
  std::optional<DenseLayer> encoder_;
};

}  // namespace eqmarl

#endif  // EQMARL_BRANCH_HPP
