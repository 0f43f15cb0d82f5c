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

#ifndef EQMARL_ENTANGLE_HPP
#define EQMARL_ENTANGLE_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eqmarl/qsim.hpp"

namespace eqmarl {

enum class EntanglementStyle { PhiPlus, PhiMinus, PsiPlus, PsiMinus, None };

inline constexpr std::array<EntanglementStyle, 5> kAllEntanglementStyles = {
    EntanglementStyle::PhiPlus, EntanglementStyle::PhiMinus, EntanglementStyle::PsiPlus,
    EntanglementStyle::PsiMinus, EntanglementStyle::None};

inline std::string to_string(EntanglementStyle s) {
  switch (s) {
    case EntanglementStyle::PhiPlus: return "phi+";
    case EntanglementStyle::PhiMinus: return "phi-";
    case EntanglementStyle::PsiPlus: return "psi+";
    case EntanglementStyle::PsiMinus: return "psi-";
    case EntanglementStyle::None: return "none";
  }
  return "none";
}

inline EntanglementStyle parse_entanglement_style(std::string_view s) {
  for (auto style : kAllEntanglementStyles) {
    if (to_string(style) == s) return style;
  }
  throw std::invalid_argument("unknown entanglement style '" + std::string(s) + "'");
}

/// N agents with D qubits each; agent n (1-based) owns the contiguous block
/// starting at (n-1)*D.
struct QubitLayout {
  int num_agents = 2;
  int qubits_per_agent = 4;

  int total_qubits() const { return num_agents * qubits_per_agent; }
  int offset(int agent_zero_based) const { return agent_zero_based * qubits_per_agent; }

  void validate() const {
    if (num_agents < 2) throw std::invalid_argument("layout needs at least 2 agents");
    if (qubits_per_agent < 1) throw std::invalid_argument("layout needs at least 1 qubit per agent");
    if (total_qubits() > kMaxQubits) throw std::invalid_argument("layout exceeds simulator capacity");
  }
};

/// Global zero-based qubit index of qubit d (1..D) of agent n (1..N).
inline int delta(int n, int d, const QubitLayout& layout) {
  if (n < 1 || n > layout.num_agents) {
    throw std::out_of_range("agent index " + std::to_string(n) + " outside [1, " +
                            std::to_string(layout.num_agents) + "]");
  }
  if (d < 1 || d > layout.qubits_per_agent) {
    throw std::out_of_range("qubit index " + std::to_string(d) + " outside [1, " +
                            std::to_string(layout.qubits_per_agent) + "]");
  }
  return (n - 1) * layout.qubits_per_agent + (d - 1);
}

/// Gate sequence of the coupling operator across qubit d of every agent, in
/// application order: X layer, then H on agent 1's qubit, then the CNOT fan-out.
inline std::vector<GateOp> coupling_gates(EntanglementStyle style, int d, const QubitLayout& layout) {
  std::vector<GateOp> gates;
  if (style == EntanglementStyle::None) return gates;
  const int n_agents = layout.num_agents;
  const int head = delta(1, d, layout);
  switch (style) {
    case EntanglementStyle::PhiMinus:
      gates.push_back(GateOp::x(head));
      break;
    case EntanglementStyle::PsiPlus:
      for (int k = 2; k <= n_agents; ++k) gates.push_back(GateOp::x(delta(k, d, layout)));
      break;
    case EntanglementStyle::PsiMinus:
      for (int k = 1; k <= n_agents; ++k) gates.push_back(GateOp::x(delta(k, d, layout)));
      break;
    default:
      break;
  }
  gates.push_back(GateOp::h(head));
  for (int n = 2; n <= n_agents; ++n) gates.push_back(GateOp::cnot(head, delta(n, d, layout)));
  return gates;
}

inline std::vector<GateOp> entangling_circuit(EntanglementStyle style, const QubitLayout& layout) {
  std::vector<GateOp> gates;
  for (int d = 1; d <= layout.qubits_per_agent; ++d) {
    auto g = coupling_gates(style, d, layout);
    gates.insert(gates.end(), g.begin(), g.end());
  }
  return gates;
}

inline StateVector prepare_entangled_input(EntanglementStyle style, const QubitLayout& layout) {
  layout.validate();
  StateVector state(layout.total_qubits());
  for (const auto& g : entangling_circuit(style, layout)) state.apply(g);
  return state;
}

}  // namespace eqmarl

#endif  // EQMARL_ENTANGLE_HPP
