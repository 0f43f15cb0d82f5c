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

#ifndef EQMARL_ACTORS_HPP
#define EQMARL_ACTORS_HPP

// Shared policies. The quantum actor runs one agent's VQC on |0...0> and
// forms logit_a = beta * w_a * <Z on qubit a mod D>; the classical actor is
// dense(h, ReLU) -> dense(|A|, Softmax). All agents sample from the same
// parameters, so gradients from every agent accumulate into one set.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eqmarl/branch.hpp"
#include "eqmarl/nn.hpp"
#include "eqmarl/vqc.hpp"

namespace eqmarl {

/// How the entropy term of the actor loss is formed.
enum class EntropyMode {
  /// alpha * (-p ln p) of the chosen action, added to the loss.
  ChosenAction,
  /// Full-distribution entropy subtracted from the loss (exploration bonus).
  FullDistribution,
};

struct PolicyOutput {
  std::vector<double> probabilities;
  int action = 0;
  double log_probability = 0.0;
};

class Actor {
 public:
  virtual ~Actor() = default;
  virtual int num_actions() const = 0;
  virtual void init(Rng& rng) = 0;
  virtual std::vector<double> probabilities(const AgentObservation& obs) const = 0;
  /// Accumulates parameter gradients given dL/d(probabilities) for one observation.
  virtual void backward(const AgentObservation& obs, std::span<const double> dprobs) = 0;
  virtual int parameter_count() const = 0;
  virtual ParameterList parameters() = 0;
};

// ---------------------------------------------------------------------------

struct QuantumActorSpec {
  int qubits = 4;
  int layers = 5;
  int num_actions = 4;
  /// 0 selects the encoder-free path; otherwise the flattened observation length.
  int encoder_inputs = 0;
  Squash phi = Squash::Arctan;
  double beta = 1.0;
  BranchRates rates;
  double action_weight_rate = 0.1;
};

class QuantumActor : public Actor {
 public:
  explicit QuantumActor(const QuantumActorSpec& spec)
      : beta_(spec.beta),
        phi_(spec.phi),
        branch_("actor", spec.qubits, spec.layers, spec.encoder_inputs, spec.rates),
        weights_("actor.action_weights", {static_cast<std::size_t>(spec.num_actions)}, 1.0) {
    if (spec.num_actions < 1) throw std::invalid_argument("actor needs at least one action");
    weights_.learning_rate = spec.action_weight_rate;
  }

  int num_actions() const override { return static_cast<int>(weights_.size()); }
  double beta() const { return beta_; }
  QuantumBranch& branch() { return branch_; }
  const QuantumBranch& branch() const { return branch_; }
  ParameterBlock& action_weights() { return weights_; }

  void init(Rng& rng) override {
    branch_.init(rng);
    std::fill(weights_.value.begin(), weights_.value.end(), 1.0);
  }

  /// <Z_q> for every qubit q of the actor circuit.
  std::vector<double> qubit_expectations(const AgentObservation& obs) const {
    const auto gates = compile_u_vqc(branch_.params(), branch_.encode(obs), phi_, 0);
    StateVector s(branch_.qubits());
    run_gates(s, gates);
    std::vector<double> z(branch_.qubits());
    for (int q = 0; q < branch_.qubits(); ++q) z[q] = expectation_z_mask(s, std::uint64_t{1} << q);
    return z;
  }

  std::vector<double> logits(const AgentObservation& obs) const {
    const auto z = qubit_expectations(obs);
    std::vector<double> out(num_actions());
    for (int a = 0; a < num_actions(); ++a) out[a] = beta_ * weights_.value[a] * z[a % branch_.qubits()];
    return out;
  }

  std::vector<double> probabilities(const AgentObservation& obs) const override {
    const auto z = logits(obs);
    for (double v : z) {
      if (!std::isfinite(v)) throw std::domain_error("non-finite actor logit");
    }
    const Eigen::VectorXd p = softmax(Eigen::Map<const Eigen::VectorXd>(z.data(), num_actions()));
    return {p.data(), p.data() + p.size()};
  }

  void backward(const AgentObservation& obs, std::span<const double> dprobs) override {
    const int d = branch_.qubits();
    DenseCache cache;
    const VqcParams params = branch_.params();
    const ObservationMatrix input = branch_.encode(obs, &cache);
    CircuitBlock block{compile_u_vqc(params, input, phi_, 0)};
    std::vector<std::uint64_t> masks(d);
    for (int q = 0; q < d; ++q) masks[q] = std::uint64_t{1} << q;
    const auto shifted = parameter_shift(StateVector(d), std::span(&block, 1), masks, {true});
    const auto& z = shifted.expectations;

    // Softmax Jacobian: dL/dlogit_j = p_j (dL/dp_j - sum_k p_k dL/dp_k).
    std::vector<double> logit(num_actions());
    for (int a = 0; a < num_actions(); ++a) logit[a] = beta_ * weights_.value[a] * z[a % d];
    const Eigen::VectorXd p = softmax(Eigen::Map<const Eigen::VectorXd>(logit.data(), num_actions()));
    double dot = 0.0;
    for (int a = 0; a < num_actions(); ++a) dot += p(a) * dprobs[a];
    std::vector<double> dz(d, 0.0);
    for (int a = 0; a < num_actions(); ++a) {
      const double dlogit = p(a) * (dprobs[a] - dot);
      weights_.grad[a] += dlogit * beta_ * z[a % d];
      dz[a % d] += dlogit * beta_ * weights_.value[a];
    }

    auto g = VqcGradient::zeros_like(params);
    for (int q = 0; q < d; ++q) {
      if (dz[q] != 0.0) accumulate_chain(g, block.gates, shifted.grads[0], d, q, dz[q], params, input, phi_);
    }
    branch_.accumulate(g, 1.0, &cache);
  }

  int parameter_count() const override { return branch_.parameter_count() + num_actions(); }

  ParameterList parameters() override {
    ParameterList out;
    branch_.append_parameters(out);
    out.push_back(&weights_);
    return out;
  }

 private:
  double beta_;
  Squash phi_;
  QuantumBranch branch_;
  ParameterBlock weights_;
};

// ---------------------------------------------------------------------------

struct ClassicalActorSpec {
  int obs_size = 36;
  int hidden = 12;
  int num_actions = 4;
  double learning_rate = 1e-3;
};

class ClassicalActor : public Actor {
 public:
  explicit ClassicalActor(const ClassicalActorSpec& spec)
      : hidden_(spec.obs_size, spec.hidden, Activation::ReLU, "actor.hidden"),
        out_(spec.hidden, spec.num_actions, Activation::Softmax, "actor.out") {
    for (auto* b : parameters()) b->learning_rate = spec.learning_rate;
  }

  int num_actions() const override { return out_.out(); }
  DenseLayer& hidden() { return hidden_; }
  DenseLayer& out() { return out_; }

  void init(Rng& rng) override {
    hidden_.init_glorot(rng);
    out_.init_glorot(rng);
  }

  std::vector<double> probabilities(const AgentObservation& obs) const override {
    const Eigen::VectorXd p = out_.forward(hidden_.forward(as_input(obs)));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (!std::isfinite(p(i))) throw std::domain_error("non-finite actor output");
    }
    return {p.data(), p.data() + p.size()};
  }

  void backward(const AgentObservation& obs, std::span<const double> dprobs) override {
    DenseCache c1, c2;
    out_.forward(hidden_.forward(as_input(obs), &c1), &c2);
    const Eigen::Map<const Eigen::VectorXd> dp(dprobs.data(), static_cast<Eigen::Index>(dprobs.size()));
    hidden_.backward(c1, out_.backward(c2, dp));
  }

  int parameter_count() const override { return hidden_.parameter_count() + out_.parameter_count(); }

  ParameterList parameters() override {
    ParameterList out;
    hidden_.append_parameters(out);
    out_.append_parameters(out);
    return out;
  }

 private:
  static Eigen::VectorXd as_input(const AgentObservation& obs) {
    return Eigen::Map<const Eigen::VectorXd>(obs.raw.data(), static_cast<Eigen::Index>(obs.raw.size()));
  }

  DenseLayer hidden_;
  DenseLayer out_;
};

// ---------------------------------------------------------------------------

/// Samples from the policy (or takes the argmax, breaking ties with `rng`).
inline PolicyOutput policy_forward(const Actor& actor, const AgentObservation& obs, Rng& rng, bool greedy = false) {
  PolicyOutput out;
  out.probabilities = actor.probabilities(obs);
  const auto& p = out.probabilities;
  if (greedy) {
    const double best = *std::max_element(p.begin(), p.end());
    std::vector<int> ties;
    for (int a = 0; a < static_cast<int>(p.size()); ++a)
      if (p[a] == best) ties.push_back(a);
    out.action = ties[ties.size() == 1 ? 0 : uniform_index(rng, ties.size())];
  } else {
    const double u = uniform01(rng);
    double acc = 0.0;
    out.action = static_cast<int>(p.size()) - 1;
    for (int a = 0; a < static_cast<int>(p.size()); ++a) {
      acc += p[a];
      if (u < acc) {
        out.action = a;
        break;
      }
    }
  }
  out.log_probability = std::log(clamp_probability(p[out.action]));
  return out;
}

/// One (observation, action, advantage) term of the actor loss.
struct ActorSample {
  const AgentObservation* obs = nullptr;
  int action = 0;
  double advantage = 0.0;
};

/// Loss term and dL/d(probabilities) for one sample.
inline double actor_term_gradient(std::span<const double> p, int action, double advantage, double alpha,
                                  EntropyMode mode, std::vector<double>& dprobs) {
  dprobs.assign(p.size(), 0.0);
  if (mode == EntropyMode::ChosenAction) {
    dprobs[action] = actor_loss_term_dp(advantage, p[action], alpha);
    return actor_loss_term(advantage, p[action], alpha);
  }
  const double pa = clamp_probability(p[action]);
  double loss = -advantage * std::log(pa);
  if (p[action] >= kProbabilityFloor) dprobs[action] = -advantage / p[action];
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double pj = clamp_probability(p[j]);
    loss += alpha * pj * std::log(pj);
    if (p[j] >= kProbabilityFloor) dprobs[j] += alpha * (std::log(p[j]) + 1.0);
  }
  return loss;
}

/// Mean actor loss over `samples`; gradients accumulate into the shared actor.
/// Advantages are treated as constants.
inline double actor_backward(Actor& actor, std::span<const ActorSample> samples, double alpha,
                             EntropyMode mode = EntropyMode::ChosenAction) {
  if (samples.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;
  std::vector<double> dprobs;
  for (const auto& s : samples) {
    const auto p = actor.probabilities(*s.obs);
    total += actor_term_gradient(p, s.action, s.advantage, alpha, mode, dprobs);
    bool any = false;
    for (auto& v : dprobs) {
      v *= inv;
      any = any || v != 0.0;
    }
    if (any) actor.backward(*s.obs, dprobs);
  }
  return total * inv;
}

}  // namespace eqmarl

#endif  // EQMARL_ACTORS_HPP
