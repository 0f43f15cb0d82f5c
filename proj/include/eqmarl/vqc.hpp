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

#ifndef EQMARL_VQC_HPP
#define EQMARL_VQC_HPP

// Re-uploading variational circuit: L repetitions of
//   variational rotations -> circular CZ ring -> scaled observation encoding
// followed by a final variational layer. Gradients use the parameter-shift
// rule on every rotation gate and the chain rule through the squash for the
// encoding gates.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqmarl/entangle.hpp"
#include "eqmarl/qsim.hpp"

namespace eqmarl {

enum class Squash { Arctan, Identity };

inline double squash(Squash phi, double z) {
  return phi == Squash::Arctan ? std::atan(z) : z;
}

inline double squash_derivative(Squash phi, double z) {
  return phi == Squash::Arctan ? 1.0 / (1.0 + z * z) : 1.0;
}

/// D x 3 real feature matrix, row-major.
struct ObservationMatrix {
  int rows = 0;
  std::vector<double> values;

  static ObservationMatrix zeros(int rows) { return {rows, std::vector<double>(rows * 3, 0.0)}; }
  static ObservationMatrix from(int rows, std::vector<double> v) {
    if (static_cast<int>(v.size()) != rows * 3) {
      throw std::invalid_argument("observation matrix needs " + std::to_string(rows * 3) +
                                  " values, got " + std::to_string(v.size()));
    }
    return {rows, std::move(v)};
  }
  double at(int d, int i) const { return values[d * 3 + i]; }
  double& at(int d, int i) { return values[d * 3 + i]; }
};

/// Trainable angles theta ((L+1) x D x 3) and encoding scales lambda (L x D x 3),
/// both flattened row-major as [layer][qubit][axis].
struct VqcParams {
  int qubits = 0;
  int layers = 0;
  std::vector<double> theta;
  std::vector<double> lambda;
  bool lambda_trainable = true;

  VqcParams() = default;
  VqcParams(int d, int l, bool lambda_is_trainable = true)
      : qubits(d),
        layers(l),
        theta(static_cast<std::size_t>((l + 1) * d * 3), 0.0),
        lambda(static_cast<std::size_t>(l * d * 3), 1.0),
        lambda_trainable(lambda_is_trainable) {
    if (d < 1 || l < 0) throw std::invalid_argument("VQC needs D >= 1 and L >= 0");
  }

  static int index(int d_count, int l, int d, int i) { return (l * d_count + d) * 3 + i; }
  double& theta_at(int l, int d, int i) { return theta[index(qubits, l, d, i)]; }
  double theta_at(int l, int d, int i) const { return theta[index(qubits, l, d, i)]; }
  double& lambda_at(int l, int d, int i) { return lambda[index(qubits, l, d, i)]; }
  double lambda_at(int l, int d, int i) const { return lambda[index(qubits, l, d, i)]; }

  std::span<const double> theta_layer(int l) const {
    return std::span<const double>(theta).subspan(static_cast<std::size_t>(l * qubits * 3), qubits * 3);
  }
  std::span<const double> lambda_layer(int l) const {
    return std::span<const double>(lambda).subspan(static_cast<std::size_t>(l * qubits * 3), qubits * 3);
  }

  int trainable_count() const {
    return static_cast<int>(theta.size()) + (lambda_trainable ? static_cast<int>(lambda.size()) : 0);
  }

  void validate() const {
    if (theta.size() != static_cast<std::size_t>((layers + 1) * qubits * 3) ||
        lambda.size() != static_cast<std::size_t>(layers * qubits * 3)) {
      throw std::invalid_argument("VQC parameter tensors do not match D=" + std::to_string(qubits) +
                                  ", L=" + std::to_string(layers));
    }
  }
};

inline int vqc_trainable_count(int d, int l, bool lambda_trainable) {
  return (l + 1) * d * 3 + (lambda_trainable ? l * d * 3 : 0);
}

// ---------------------------------------------------------------------------
// Compiled circuits

enum class AngleRole : std::uint8_t { None, Theta, Encoding };

/// A gate with its angle resolved and a back-reference to the parameter that
/// produced it (`index` into theta or lambda, see VqcParams::index).
struct CircuitGate {
  GateKind kind;
  int q0;
  int q1;
  double angle;
  AngleRole role;
  int index;
};

inline void run_gates(StateVector& state, std::span<const CircuitGate> gates) {
  for (const auto& g : gates) state.apply_unchecked(g.kind, g.q0, g.q1, g.angle);
}

namespace detail {

inline constexpr GateKind kAxes[3] = {GateKind::RX, GateKind::RY, GateKind::RZ};

inline void check_block(int num_qubits, int offset, int d) {
  if (offset < 0 || offset + d > num_qubits) {
    throw std::out_of_range("qubit block [" + std::to_string(offset) + ", " + std::to_string(offset + d) +
                            ") exceeds register of " + std::to_string(num_qubits));
  }
}

inline void append_var(std::vector<CircuitGate>& out, std::span<const double> angles, int layer, int d_count,
                       int offset) {
  for (int d = 0; d < d_count; ++d) {
    for (int i = 0; i < 3; ++i) {
      out.push_back({kAxes[i], offset + d, -1, angles[d * 3 + i], AngleRole::Theta,
                     VqcParams::index(d_count, layer, d, i)});
    }
  }
}

inline void append_circ(std::vector<CircuitGate>& out, int d_count, int offset) {
  if (d_count < 2) return;
  for (int d = 0; d + 1 < d_count; ++d) {
    out.push_back({GateKind::CZ, offset + d, offset + d + 1, 0.0, AngleRole::None, -1});
  }
  out.push_back({GateKind::CZ, offset, offset + d_count - 1, 0.0, AngleRole::None, -1});
}

inline void append_enc(std::vector<CircuitGate>& out, std::span<const double> lambda_layer,
                       const ObservationMatrix& obs, Squash phi, int layer, int d_count, int offset) {
  for (int d = 0; d < d_count; ++d) {
    for (int i = 0; i < 3; ++i) {
      const double a = squash(phi, lambda_layer[d * 3 + i] * obs.at(d, i));
      if (!std::isfinite(a)) {
        throw std::domain_error("non-finite encoding angle at qubit " + std::to_string(d) + ", axis " +
                                std::to_string(i));
      }
      out.push_back({kAxes[i], offset + d, -1, a, AngleRole::Encoding, VqcParams::index(d_count, layer, d, i)});
    }
  }
}

}  // namespace detail

/// Full U_vqc gate list for one agent, in application order (layer 0 first).
inline std::vector<CircuitGate> compile_u_vqc(const VqcParams& params, const ObservationMatrix& obs, Squash phi,
                                              int qubit_offset) {
  params.validate();
  if (obs.rows != params.qubits) {
    throw std::invalid_argument("observation has " + std::to_string(obs.rows) + " rows, circuit has " +
                                std::to_string(params.qubits) + " qubits");
  }
  std::vector<CircuitGate> gates;
  const int d = params.qubits;
  gates.reserve(static_cast<std::size_t>((params.layers + 1) * d * 3 + params.layers * (d * 4)));
  for (int l = 0; l < params.layers; ++l) {
    detail::append_var(gates, params.theta_layer(l), l, d, qubit_offset);
    detail::append_circ(gates, d, qubit_offset);
    detail::append_enc(gates, params.lambda_layer(l), obs, phi, l, d, qubit_offset);
  }
  detail::append_var(gates, params.theta_layer(params.layers), params.layers, d, qubit_offset);
  return gates;
}

inline StateVector apply_u_var(StateVector state, std::span<const double> layer_angles, int qubit_offset) {
  if (layer_angles.size() % 3 != 0) throw std::invalid_argument("layer angles must be D x 3");
  const int d = static_cast<int>(layer_angles.size() / 3);
  detail::check_block(state.num_qubits(), qubit_offset, d);
  std::vector<CircuitGate> gates;
  detail::append_var(gates, layer_angles, 0, d, qubit_offset);
  run_gates(state, gates);
  return state;
}

inline StateVector apply_u_circ(StateVector state, int qubit_offset, int d) {
  detail::check_block(state.num_qubits(), qubit_offset, d);
  std::vector<CircuitGate> gates;
  detail::append_circ(gates, d, qubit_offset);
  run_gates(state, gates);
  return state;
}

inline StateVector apply_u_enc(StateVector state, std::span<const double> lambda_layer, const ObservationMatrix& obs,
                               Squash phi, int qubit_offset) {
  if (lambda_layer.size() != obs.values.size()) {
    throw std::invalid_argument("lambda layer and observation shapes differ");
  }
  detail::check_block(state.num_qubits(), qubit_offset, obs.rows);
  std::vector<CircuitGate> gates;
  detail::append_enc(gates, lambda_layer, obs, phi, 0, obs.rows, qubit_offset);
  run_gates(state, gates);
  return state;
}

inline StateVector apply_u_vqc(StateVector state, const VqcParams& params, const ObservationMatrix& obs, Squash phi,
                               int qubit_offset) {
  detail::check_block(state.num_qubits(), qubit_offset, params.qubits);
  run_gates(state, compile_u_vqc(params, obs, phi, qubit_offset));
  return state;
}

// ---------------------------------------------------------------------------
// Parameter-shift engine

/// A group of gates acting on a qubit subset disjoint from every other block
/// of the same circuit, so blocks commute with each other.
struct CircuitBlock {
  std::vector<CircuitGate> gates;
};

struct ShiftResult {
  /// Expectation per observable on the unshifted circuit.
  std::vector<double> expectations;
  /// grads[b][g * num_observables + k] = dE_k / d(angle of gate g in block b);
  /// empty for blocks that were not differentiated.
  std::vector<std::vector<double>> grads;
};

inline void expectations_into(const StateVector& s, std::span<const std::uint64_t> masks, double* out) {
  for (std::size_t k = 0; k < masks.size(); ++k) out[k] = expectation_z_mask(s, masks[k]);
}

/// Evaluates the observables on input -> blocks and, for each block flagged in
/// `differentiate`, the parameter-shift derivative with respect to every
/// rotation angle in that block. Other blocks are applied first (they commute)
/// so each shifted evaluation only replays the suffix of the differentiated
/// block.
inline ShiftResult parameter_shift(const StateVector& input, std::span<const CircuitBlock> blocks,
                                   std::span<const std::uint64_t> masks, const std::vector<bool>& differentiate) {
  constexpr double kShift = std::numbers::pi / 2.0;
  const std::size_t nk = masks.size();
  ShiftResult out;
  out.expectations.assign(nk, 0.0);
  out.grads.resize(blocks.size());

  {
    StateVector s = input;
    for (const auto& b : blocks) run_gates(s, b.gates);
    expectations_into(s, masks, out.expectations.data());
  }

  std::vector<double> plus(nk), minus(nk);
  StateVector scratch = input;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (bi >= differentiate.size() || !differentiate[bi]) continue;
    const auto& gates = blocks[bi].gates;
    auto& grad = out.grads[bi];
    grad.assign(gates.size() * nk, 0.0);

    StateVector cur = input;
    for (std::size_t bj = 0; bj < blocks.size(); ++bj) {
      if (bj != bi) run_gates(cur, blocks[bj].gates);
    }
    for (std::size_t g = 0; g < gates.size(); ++g) {
      const CircuitGate& gate = gates[g];
      if (is_rotation(gate.kind)) {
        const auto rest = std::span<const CircuitGate>(gates).subspan(g + 1);
        for (int sign : {+1, -1}) {
          scratch = cur;
          scratch.apply_unchecked(gate.kind, gate.q0, gate.q1, gate.angle + sign * kShift);
          run_gates(scratch, rest);
          expectations_into(scratch, masks, sign > 0 ? plus.data() : minus.data());
        }
        for (std::size_t k = 0; k < nk; ++k) grad[g * nk + k] = 0.5 * (plus[k] - minus[k]);
      }
      cur.apply_unchecked(gate.kind, gate.q0, gate.q1, gate.angle);
    }
  }
  return out;
}

/// Gradient of a scalar with respect to one agent's circuit inputs.
struct VqcGradient {
  std::vector<double> theta;
  std::vector<double> lambda;  // zero-length when lambda is not trainable
  std::vector<double> obs;     // D x 3, d(scalar)/d(observation entry)

  static VqcGradient zeros_like(const VqcParams& p) {
    return {std::vector<double>(p.theta.size(), 0.0),
            std::vector<double>(p.lambda_trainable ? p.lambda.size() : 0, 0.0),
            std::vector<double>(static_cast<std::size_t>(p.qubits * 3), 0.0)};
  }

  void axpy(double a, const VqcGradient& o) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += a * o.theta[i];
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] += a * o.lambda[i];
    for (std::size_t i = 0; i < obs.size(); ++i) obs[i] += a * o.obs[i];
  }
};

/// Accumulates `weight * dE/dangle` from gate-angle derivatives into parameter
/// and observation derivatives. `stride`/`column` select one observable out of
/// the interleaved layout produced by parameter_shift.
inline void accumulate_chain(VqcGradient& out, std::span<const CircuitGate> gates, std::span<const double> grads,
                             std::size_t stride, std::size_t column, double weight, const VqcParams& params,
                             const ObservationMatrix& obs, Squash phi) {
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const CircuitGate& gate = gates[g];
    const double dangle = weight * grads[g * stride + column];
    if (gate.role == AngleRole::Theta) {
      out.theta[gate.index] += dangle;
    } else if (gate.role == AngleRole::Encoding) {
      const int obs_index = gate.index % (params.qubits * 3);
      const double lam = params.lambda[gate.index];
      const double o = obs.values[obs_index];
      const double dphi = squash_derivative(phi, lam * o);
      if (params.lambda_trainable) out.lambda[gate.index] += dangle * dphi * o;
      out.obs[obs_index] += dangle * dphi * lam;
    }
  }
}

// ---------------------------------------------------------------------------
// Joint (multi-agent) circuits

/// N agents' U_vqc branches on an entangled input, measured with Z on every qubit.
struct JointCircuitSpec {
  EntanglementStyle style = EntanglementStyle::PsiPlus;
  QubitLayout layout;
  Squash phi = Squash::Arctan;
};

inline std::vector<CircuitBlock> compile_joint(const JointCircuitSpec& spec, std::span<const VqcParams> params,
                                               std::span<const ObservationMatrix> obs) {
  if (static_cast<int>(params.size()) != spec.layout.num_agents ||
      static_cast<int>(obs.size()) != spec.layout.num_agents) {
    throw std::invalid_argument("joint circuit needs parameters and an observation for each of " +
                                std::to_string(spec.layout.num_agents) + " agents");
  }
  std::vector<CircuitBlock> blocks(params.size());
  for (std::size_t n = 0; n < params.size(); ++n) {
    if (params[n].qubits != spec.layout.qubits_per_agent) {
      throw std::invalid_argument("agent " + std::to_string(n) + " circuit width differs from layout");
    }
    blocks[n].gates = compile_u_vqc(params[n], obs[n], spec.phi, spec.layout.offset(static_cast<int>(n)));
  }
  return blocks;
}

inline double joint_expectation(const JointCircuitSpec& spec, std::span<const VqcParams> params,
                                std::span<const ObservationMatrix> obs) {
  const auto blocks = compile_joint(spec, params, obs);
  StateVector s = prepare_entangled_input(spec.style, spec.layout);
  for (const auto& b : blocks) run_gates(s, b.gates);
  return expectation_z_mask(s, PauliZProduct::all(spec.layout.total_qubits()).mask());
}

struct JointGradient {
  double expectation = 0.0;
  std::vector<VqcGradient> per_agent;
};

/// dE/d(theta, trainable lambda, obs) of the joint Z-product expectation for
/// every agent in `agents` (all agents when empty).
inline JointGradient grad_expectation(const JointCircuitSpec& spec, std::span<const VqcParams> params,
                                      std::span<const ObservationMatrix> obs, const PauliZProduct& observable,
                                      std::vector<bool> agents = {}) {
  const auto blocks = compile_joint(spec, params, obs);
  if (agents.empty()) agents.assign(blocks.size(), true);
  const StateVector input = prepare_entangled_input(spec.style, spec.layout);
  const std::uint64_t mask = observable.mask();
  const auto shifted = parameter_shift(input, blocks, std::span<const std::uint64_t>(&mask, 1), agents);
  JointGradient out;
  out.expectation = shifted.expectations[0];
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    auto g = VqcGradient::zeros_like(params[n]);
    if (agents[n]) accumulate_chain(g, blocks[n].gates, shifted.grads[n], 1, 0, 1.0, params[n], obs[n], spec.phi);
    out.per_agent.push_back(std::move(g));
  }
  return out;
}

}  // namespace eqmarl

#endif  // EQMARL_VQC_HPP
