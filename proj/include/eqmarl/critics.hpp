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

#ifndef EQMARL_CRITICS_HPP
#define EQMARL_CRITICS_HPP

// Joint value critics.
//
//   eqmarl  per-agent VQC branches on an entangled input, Z on every qubit,
//           V = w (1 + <Z...Z>) / 2; gradients split at <Z...Z>.
//   qfctde  the same circuit without input entanglement, evaluated centrally.
//   fctde   concatenated observations -> dense(h, ReLU) -> dense(1).
//   sctde   per-agent dense(h, ReLU) branches -> concatenation -> dense(1);
//           gradients split at the concatenated embedding.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqmarl/branch.hpp"
#include "eqmarl/entangle.hpp"
#include "eqmarl/nn.hpp"
#include "eqmarl/vqc.hpp"

namespace eqmarl {

enum class CriticKind { EQMARL, QFCTDE, FCTDE, SCTDE };

inline std::string to_string(CriticKind k) {
  switch (k) {
    case CriticKind::EQMARL: return "eqmarl";
    case CriticKind::QFCTDE: return "qfctde";
    case CriticKind::FCTDE: return "fctde";
    case CriticKind::SCTDE: return "sctde";
  }
  return "eqmarl";
}

inline CriticKind parse_critic_kind(std::string_view s) {
  for (auto k : {CriticKind::EQMARL, CriticKind::QFCTDE, CriticKind::FCTDE, CriticKind::SCTDE}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown framework '" + std::string(s) + "'");
}

inline bool is_quantum(CriticKind k) { return k == CriticKind::EQMARL || k == CriticKind::QFCTDE; }

struct ParameterCount {
  int per_agent = 0;
  int central = 0;
  int total = 0;
  bool operator==(const ParameterCount&) const = default;
};

struct CriticSpec {
  CriticKind kind = CriticKind::EQMARL;
  EntanglementStyle style = EntanglementStyle::PsiPlus;
  int num_agents = 2;
  int qubits = 4;
  int layers = 5;
  /// Length of each agent's flattened observation.
  int obs_size = 36;
  /// Quantum critics only: route the flattened observation through a linear encoder.
  bool encoder = false;
  Squash phi = Squash::Arctan;
  int hidden = 12;
  /// sCTDE central head activation (Linear or ReLU).
  Activation head = Activation::Linear;
  BranchRates branch_rates;
  /// Learning rate of the quantum critic's scale w.
  double scale_rate = 0.1;
  /// Learning rate of every classical critic tensor.
  double classical_rate = 1e-3;
};

struct ValueEstimate {
  double value = 0.0;
  /// Split-point expectation <Z...Z> (quantum critics only).
  std::optional<double> expectation;
};

class Critic {
 public:
  virtual ~Critic() = default;
  virtual CriticKind kind() const = 0;
  virtual int num_agents() const = 0;
  virtual void init(Rng& rng) = 0;
  virtual ValueEstimate estimate(const JointObservation& obs) const = 0;
  /// Accumulates d(sum_t dvalue[t] * V(obs[t])) / d(parameters) into the block gradients.
  virtual void backward(std::span<const JointObservation> obs, std::span<const double> dvalue) = 0;
  virtual ParameterCount count() const = 0;
  virtual ParameterList parameters() = 0;

 protected:
  void check_agents(const JointObservation& obs) const {
    if (static_cast<int>(obs.size()) != num_agents()) {
      throw std::invalid_argument("critic expects observations from " + std::to_string(num_agents()) +
                                  " agents, got " + std::to_string(obs.size()));
    }
  }
};

// ---------------------------------------------------------------------------

class QuantumCritic : public Critic {
 public:
  explicit QuantumCritic(const CriticSpec& spec)
      : kind_(spec.kind),
        circuit_{spec.kind == CriticKind::QFCTDE ? EntanglementStyle::None : spec.style,
                 {spec.num_agents, spec.qubits},
                 spec.phi},
        scale_("critic.w", {1}, 1.0) {
    if (!is_quantum(spec.kind)) throw std::invalid_argument("not a quantum critic kind");
    circuit_.layout.validate();
    scale_.learning_rate = spec.scale_rate;
    for (int n = 0; n < spec.num_agents; ++n) {
      branches_.emplace_back("critic.agent" + std::to_string(n), spec.qubits, spec.layers,
                             spec.encoder ? spec.obs_size : 0, spec.branch_rates);
    }
  }

  CriticKind kind() const override { return kind_; }
  int num_agents() const override { return static_cast<int>(branches_.size()); }
  const JointCircuitSpec& circuit() const { return circuit_; }
  double scale() const { return scale_.value[0]; }
  ParameterBlock& scale_block() { return scale_; }
  QuantumBranch& branch(int n) { return branches_.at(n); }
  const QuantumBranch& branch(int n) const { return branches_.at(n); }

  void init(Rng& rng) override {
    for (auto& b : branches_) b.init(rng);
    scale_.value[0] = 1.0;
  }

  /// <Z...Z> of the joint circuit for one joint observation.
  double expectation(const JointObservation& obs) const {
    check_agents(obs);
    std::vector<VqcParams> params;
    std::vector<ObservationMatrix> inputs;
    for (std::size_t n = 0; n < branches_.size(); ++n) {
      params.push_back(branches_[n].params());
      inputs.push_back(branches_[n].encode(obs[n]));
    }
    return joint_expectation(circuit_, params, inputs);
  }

  ValueEstimate estimate(const JointObservation& obs) const override {
    const double x = expectation(obs);
    return {scale() * (1.0 + x) / 2.0, x};
  }

  /// Server side: dL/dx for every step from dL/dV.
  std::vector<double> central_factors(std::span<const double> dvalue) const {
    std::vector<double> gx(dvalue.size());
    for (std::size_t t = 0; t < dvalue.size(); ++t) gx[t] = dvalue[t] * scale() / 2.0;
    return gx;
  }

  /// Server side: dL/dw from dL/dV and the measured expectations.
  void accumulate_scale_gradient(std::span<const double> dvalue, std::span<const double> expectations) {
    for (std::size_t t = 0; t < dvalue.size(); ++t) scale_.grad[0] += dvalue[t] * (1.0 + expectations[t]) / 2.0;
  }

  /// Agent side: each branch accumulates gx[t] * dx_t/d(its parameters).
  /// Returns the expectations it evaluated along the way.
  std::vector<double> branch_backward(std::span<const JointObservation> obs, std::span<const double> gx) {
    std::vector<double> xs;
    const PauliZProduct all = PauliZProduct::all(circuit_.layout.total_qubits());
    for (std::size_t t = 0; t < obs.size(); ++t) {
      check_agents(obs[t]);
      std::vector<VqcParams> params;
      std::vector<ObservationMatrix> inputs;
      std::vector<DenseCache> caches(branches_.size());
      for (std::size_t n = 0; n < branches_.size(); ++n) {
        params.push_back(branches_[n].params());
        inputs.push_back(branches_[n].encode(obs[t][n], &caches[n]));
      }
      const auto g = grad_expectation(circuit_, params, inputs, all);
      xs.push_back(g.expectation);
      for (std::size_t n = 0; n < branches_.size(); ++n) branches_[n].accumulate(g.per_agent[n], gx[t], &caches[n]);
    }
    return xs;
  }

  void backward(std::span<const JointObservation> obs, std::span<const double> dvalue) override {
    if (obs.size() != dvalue.size()) throw std::invalid_argument("critic backward length mismatch");
    const auto gx = central_factors(dvalue);
    const auto xs = branch_backward(obs, gx);
    accumulate_scale_gradient(dvalue, xs);
  }

  ParameterCount count() const override {
    const int per = branches_.front().parameter_count();
    const int total = per * num_agents() + 1;
    if (kind_ == CriticKind::QFCTDE) return {0, total, total};
    return {per, 1, total};
  }

  ParameterList parameters() override {
    ParameterList out;
    for (auto& b : branches_) b.append_parameters(out);
    out.push_back(&scale_);
    return out;
  }

 private:
  CriticKind kind_;
  JointCircuitSpec circuit_;
  std::vector<QuantumBranch> branches_;
  ParameterBlock scale_;
};

// ---------------------------------------------------------------------------

inline Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class FullyCentralCritic : public Critic {
 public:
  explicit FullyCentralCritic(const CriticSpec& spec)
      : agents_(spec.num_agents),
        obs_size_(spec.obs_size),
        hidden_(spec.num_agents * spec.obs_size, spec.hidden, Activation::ReLU, "critic.hidden"),
        out_(spec.hidden, 1, Activation::Linear, "critic.out") {
    for (auto* b : parameters()) b->learning_rate = spec.classical_rate;
  }

  CriticKind kind() const override { return CriticKind::FCTDE; }
  int num_agents() const override { return agents_; }
  DenseLayer& hidden() { return hidden_; }
  DenseLayer& out() { return out_; }

  void init(Rng& rng) override {
    hidden_.init_glorot(rng);
    out_.init_glorot(rng);
  }

  Eigen::VectorXd joint_input(const JointObservation& obs) const {
    check_agents(obs);
    Eigen::VectorXd x(agents_ * obs_size_);
    for (int n = 0; n < agents_; ++n) {
      if (static_cast<int>(obs[n].raw.size()) != obs_size_) throw std::invalid_argument("observation size mismatch");
      x.segment(n * obs_size_, obs_size_) = as_vector(obs[n].raw);
    }
    return x;
  }

  ValueEstimate estimate(const JointObservation& obs) const override {
    return {out_.forward(hidden_.forward(joint_input(obs)))(0), std::nullopt};
  }

  void backward(std::span<const JointObservation> obs, std::span<const double> dvalue) override {
    if (obs.size() != dvalue.size()) throw std::invalid_argument("critic backward length mismatch");
    for (std::size_t t = 0; t < obs.size(); ++t) {
      DenseCache c1, c2;
      out_.forward(hidden_.forward(joint_input(obs[t]), &c1), &c2);
      hidden_.backward(c1, out_.backward(c2, Eigen::VectorXd::Constant(1, dvalue[t])));
    }
  }

  ParameterCount count() const override {
    const int total = hidden_.parameter_count() + out_.parameter_count();
    return {0, total, total};
  }

  ParameterList parameters() override {
    ParameterList out;
    hidden_.append_parameters(out);
    out_.append_parameters(out);
    return out;
  }

 private:
  int agents_;
  int obs_size_;
  DenseLayer hidden_;
  DenseLayer out_;
};

// ---------------------------------------------------------------------------

class SplitClassicalCritic : public Critic {
 public:
  explicit SplitClassicalCritic(const CriticSpec& spec)
      : hidden_size_(spec.hidden), head_(spec.num_agents * spec.hidden, 1, spec.head, "critic.central") {
    if (spec.head == Activation::Softmax) throw std::invalid_argument("sCTDE head must be Linear or ReLU");
    for (int n = 0; n < spec.num_agents; ++n) {
      branches_.emplace_back(spec.obs_size, spec.hidden, Activation::ReLU, "critic.agent" + std::to_string(n));
    }
    for (auto* b : parameters()) b->learning_rate = spec.classical_rate;
  }

  CriticKind kind() const override { return CriticKind::SCTDE; }
  int num_agents() const override { return static_cast<int>(branches_.size()); }
  DenseLayer& branch(int n) { return branches_.at(n); }
  DenseLayer& head() { return head_; }

  void init(Rng& rng) override {
    for (auto& b : branches_) b.init_glorot(rng);
    head_.init_glorot(rng);
  }

  ValueEstimate estimate(const JointObservation& obs) const override {
    check_agents(obs);
    Eigen::VectorXd z(num_agents() * hidden_size_);
    for (int n = 0; n < num_agents(); ++n) z.segment(n * hidden_size_, hidden_size_) = branches_[n].forward(as_vector(obs[n].raw));
    return {head_.forward(z)(0), std::nullopt};
  }

  void backward(std::span<const JointObservation> obs, std::span<const double> dvalue) override {
    if (obs.size() != dvalue.size()) throw std::invalid_argument("critic backward length mismatch");
    for (std::size_t t = 0; t < obs.size(); ++t) {
      check_agents(obs[t]);
      std::vector<DenseCache> caches(branches_.size());
      Eigen::VectorXd z(num_agents() * hidden_size_);
      for (int n = 0; n < num_agents(); ++n) {
        z.segment(n * hidden_size_, hidden_size_) = branches_[n].forward(as_vector(obs[t][n].raw), &caches[n]);
      }
      // Server: gradient at the cut (the concatenated embedding).
      DenseCache hc;
      head_.forward(z, &hc);
      const Eigen::VectorXd dz = head_.backward(hc, Eigen::VectorXd::Constant(1, dvalue[t]));
      // Agents: local backprop of their slice.
      for (int n = 0; n < num_agents(); ++n) branches_[n].backward(caches[n], dz.segment(n * hidden_size_, hidden_size_));
    }
  }

  ParameterCount count() const override {
    const int per = branches_.front().parameter_count();
    const int central = head_.parameter_count();
    return {per, central, per * num_agents() + central};
  }

  ParameterList parameters() override {
    ParameterList out;
    for (auto& b : branches_) b.append_parameters(out);
    head_.append_parameters(out);
    return out;
  }

 private:
  int hidden_size_;
  std::vector<DenseLayer> branches_;
  DenseLayer head_;
};

// ---------------------------------------------------------------------------

inline std::unique_ptr<Critic> make_critic(const CriticSpec& spec) {
  if (spec.num_agents < 1) throw std::invalid_argument("critic needs at least one agent");
  switch (spec.kind) {
    case CriticKind::EQMARL:
    case CriticKind::QFCTDE: return std::make_unique<QuantumCritic>(spec);
    case CriticKind::FCTDE: return std::make_unique<FullyCentralCritic>(spec);
    case CriticKind::SCTDE: return std::make_unique<SplitClassicalCritic>(spec);
  }
  throw std::invalid_argument("unknown critic kind");
}

inline ValueEstimate estimate_joint_value(const Critic& critic, const JointObservation& obs) {
  return critic.estimate(obs);
}

inline ParameterCount count_parameters(const Critic& critic) { return critic.count(); }

/// Huber loss of `predicted` (= V(obs[t])) against constant targets; gradients
/// are accumulated into the critic. Returns the loss.
inline double critic_backward(Critic& critic, std::span<const JointObservation> obs,
                              std::span<const double> predicted, std::span<const double> targets,
                              double delta = 1.0) {
  const double loss = huber_loss(predicted, targets, delta);
  critic.backward(obs, huber_gradient(predicted, targets, delta));
  return loss;
}

}  // namespace eqmarl

#endif  // EQMARL_CRITICS_HPP
