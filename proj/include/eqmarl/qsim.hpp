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

#ifndef EQMARL_QSIM_HPP
#define EQMARL_QSIM_HPP

// Dense statevector simulator.
//
// Qubit ordering is little-endian: qubit k contributes 2^k to the basis index,
// so qubit 0 is the least significant bit of the amplitude index.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eqmarl {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 24;

enum class GateKind { X, Y, Z, H, RX, RY, RZ, CNOT, CZ };

inline constexpr bool is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

inline constexpr bool is_two_qubit(GateKind kind) {
  return kind == GateKind::CNOT || kind == GateKind::CZ;
}

inline const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
  }
  return "?";
}

/// A gate applied to one or two qubits. For two-qubit gates the control is
/// `targets[0]`.
struct GateOp {
  GateKind kind = GateKind::X;
  std::vector<int> targets;
  std::optional<double> angle;

  static GateOp x(int q) { return {GateKind::X, {q}, std::nullopt}; }
  static GateOp y(int q) { return {GateKind::Y, {q}, std::nullopt}; }
  static GateOp z(int q) { return {GateKind::Z, {q}, std::nullopt}; }
  static GateOp h(int q) { return {GateKind::H, {q}, std::nullopt}; }
  static GateOp rx(int q, double a) { return {GateKind::RX, {q}, a}; }
  static GateOp ry(int q, double a) { return {GateKind::RY, {q}, a}; }
  static GateOp rz(int q, double a) { return {GateKind::RZ, {q}, a}; }
  static GateOp cnot(int c, int t) { return {GateKind::CNOT, {c, t}, std::nullopt}; }
  static GateOp cz(int c, int t) { return {GateKind::CZ, {c, t}, std::nullopt}; }
};

/// Tensor product of Z over `qubits`.
struct PauliZProduct {
  std::vector<int> qubits;

  static PauliZProduct on(std::initializer_list<int> qs) { return {std::vector<int>(qs)}; }
  static PauliZProduct all(int num_qubits) {
    PauliZProduct p;
    for (int q = 0; q < num_qubits; ++q) p.qubits.push_back(q);
    return p;
  }

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (int q : qubits) m |= std::uint64_t{1} << q;
    return m;
  }
};

class StateVector {
 public:
  explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
      throw std::invalid_argument("qubit count " + std::to_string(num_qubits) +
                                  " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
    amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
  }

  /// Builds a state from explicit amplitudes; the length must be a power of two.
  static StateVector from_amplitudes(std::vector<Complex> amps) {
    const std::size_t n = amps.size();
    if (n < 2 || !std::has_single_bit(n)) {
      throw std::invalid_argument("amplitude count must be a power of two >= 2");
    }
    StateVector s(std::countr_zero(n));
    s.amps_ = std::move(amps);
    return s;
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> amplitudes() { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  void reset() {
    std::fill(amps_.begin(), amps_.end(), Complex{0.0, 0.0});
    amps_[0] = 1.0;
  }

  /// Validated in-place application.
  void apply(const GateOp& gate) {
    validate(gate);
    const int q0 = gate.targets[0];
    const int q1 = gate.targets.size() > 1 ? gate.targets[1] : -1;
    apply_unchecked(gate.kind, q0, q1, gate.angle.value_or(0.0));
  }

  /// Hot path used by circuit evaluation; targets are trusted.
  void apply_unchecked(GateKind kind, int q0, int q1, double angle) {
    switch (kind) {
      case GateKind::X: apply_x(q0); break;
      case GateKind::Y: apply_y(q0); break;
      case GateKind::Z: apply_z(q0); break;
      case GateKind::H: apply_h(q0); break;
      case GateKind::RX: apply_rx(q0, angle); break;
      case GateKind::RY: apply_ry(q0, angle); break;
      case GateKind::RZ: apply_rz(q0, angle); break;
      case GateKind::CNOT: apply_cnot(q0, q1); break;
      case GateKind::CZ: apply_cz(q0, q1); break;
    }
  }

  void validate(const GateOp& gate) const {
    const std::size_t arity = is_two_qubit(gate.kind) ? 2 : 1;
    if (gate.targets.size() != arity) {
      throw std::invalid_argument(std::string(gate_name(gate.kind)) + " expects " +
                                  std::to_string(arity) + " target(s)");
    }
    for (int q : gate.targets) {
      if (q < 0 || q >= num_qubits_) {
        throw std::out_of_range("qubit index " + std::to_string(q) + " outside register of " +
                                std::to_string(num_qubits_));
      }
    }
    if (arity == 2 && gate.targets[0] == gate.targets[1]) {
      throw std::invalid_argument("two-qubit gate targets must be distinct");
    }
    if (is_rotation(gate.kind) && !gate.angle.has_value()) {
      throw std::invalid_argument(std::string(gate_name(gate.kind)) + " requires an angle");
    }
  }

 private:
  // Iterates over index pairs (i0, i1) differing only in bit `q`.
  template <typename F>
  void for_pairs(int q, F&& f) {
    const std::size_t stride = std::size_t{1} << q;
    const std::size_t n = amps_.size();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) f(i, i + stride);
    }
  }

  double* raw() { return reinterpret_cast<double*>(amps_.data()); }

  void apply_x(int q) {
    for_pairs(q, [this](std::size_t i0, std::size_t i1) { std::swap(amps_[i0], amps_[i1]); });
  }

  void apply_y(int q) {
    double* a = raw();
    // Y = [[0, -i], [i, 0]]
    for_pairs(q, [a](std::size_t i0, std::size_t i1) {
      const double r0 = a[2 * i0], m0 = a[2 * i0 + 1];
      const double r1 = a[2 * i1], m1 = a[2 * i1 + 1];
      a[2 * i0] = m1;
      a[2 * i0 + 1] = -r1;
      a[2 * i1] = -m0;
      a[2 * i1 + 1] = r0;
    });
  }

  void apply_z(int q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & bit) amps_[i] = -amps_[i];
    }
  }

  void apply_h(int q) {
    double* a = raw();
    const double s = 1.0 / std::sqrt(2.0);
    for_pairs(q, [a, s](std::size_t i0, std::size_t i1) {
      const double r0 = a[2 * i0], m0 = a[2 * i0 + 1];
      const double r1 = a[2 * i1], m1 = a[2 * i1 + 1];
      a[2 * i0] = s * (r0 + r1);
      a[2 * i0 + 1] = s * (m0 + m1);
      a[2 * i1] = s * (r0 - r1);
      a[2 * i1 + 1] = s * (m0 - m1);
    });
  }

  // RX(a) = [[c, -i s], [-i s, c]] with c = cos(a/2), s = sin(a/2).
  void apply_rx(int q, double angle) {
    double* a = raw();
    const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    for_pairs(q, [a, c, s](std::size_t i0, std::size_t i1) {
      const double r0 = a[2 * i0], m0 = a[2 * i0 + 1];
      const double r1 = a[2 * i1], m1 = a[2 * i1 + 1];
      a[2 * i0] = c * r0 + s * m1;
      a[2 * i0 + 1] = c * m0 - s * r1;
      a[2 * i1] = s * m0 + c * r1;
      a[2 * i1 + 1] = -s * r0 + c * m1;
    });
  }

  // RY(a) = [[c, -s], [s, c]].
  void apply_ry(int q, double angle) {
    double* a = raw();
    const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    for_pairs(q, [a, c, s](std::size_t i0, std::size_t i1) {
      const double r0 = a[2 * i0], m0 = a[2 * i0 + 1];
      const double r1 = a[2 * i1], m1 = a[2 * i1 + 1];
      a[2 * i0] = c * r0 - s * r1;
      a[2 * i0 + 1] = c * m0 - s * m1;
      a[2 * i1] = s * r0 + c * r1;
      a[2 * i1 + 1] = s * m0 + c * m1;
    });
  }

  // RZ(a) = diag(e^{-i a/2}, e^{i a/2}).
  void apply_rz(int q, double angle) {
    double* a = raw();
    const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    for_pairs(q, [a, c, s](std::size_t i0, std::size_t i1) {
      const double r0 = a[2 * i0], m0 = a[2 * i0 + 1];
      const double r1 = a[2 * i1], m1 = a[2 * i1 + 1];
      a[2 * i0] = c * r0 + s * m0;
      a[2 * i0 + 1] = c * m0 - s * r0;
      a[2 * i1] = c * r1 - s * m1;
      a[2 * i1 + 1] = c * m1 + s * r1;
    });
  }

  void apply_cnot(int control, int target) {
    const std::uint64_t cbit = std::uint64_t{1} << control;
    for_pairs(target, [this, cbit](std::size_t i0, std::size_t i1) {
      if (i0 & cbit) std::swap(amps_[i0], amps_[i1]);
    });
  }

  void apply_cz(int a, int b) {
    const std::uint64_t both = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if ((i & both) == both) amps_[i] = -amps_[i];
    }
  }

  int num_qubits_;
  std::vector<Complex> amps_;
};

inline StateVector zero_state(int num_qubits) { return StateVector(num_qubits); }

inline StateVector apply_gate(StateVector state, const GateOp& gate) {
  state.apply(gate);
  return state;
}

/// Sum over basis states of parity(b restricted to mask) * |amp_b|^2.
inline double expectation_z_mask(const StateVector& state, std::uint64_t mask) {
  double e = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t b = 0; b < amps.size(); ++b) {
    const double p = std::norm(amps[b]);
    e += (std::popcount(b & mask) & 1) ? -p : p;
  }
  return e;
}

inline double expectation_z_product(const StateVector& state, const PauliZProduct& obs) {
  if (obs.qubits.empty()) throw std::invalid_argument("Z product needs at least one qubit");
  std::uint64_t mask = 0;
  for (int q : obs.qubits) {
    if (q < 0 || q >= state.num_qubits()) {
      throw std::out_of_range("observable qubit " + std::to_string(q) + " outside register");
    }
    const std::uint64_t bit = std::uint64_t{1} << q;
    if (mask & bit) throw std::invalid_argument("observable qubits must be distinct");
    mask |= bit;
  }
  return expectation_z_mask(state, mask);
}

}  // namespace eqmarl

#endif  // EQMARL_QSIM_HPP
