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

#ifndef EQMARL_ORACLE_HPP
#define EQMARL_ORACLE_HPP

// Brute-force references for the simulator and the critics: full 2^Q x 2^Q
// gate matrices from Kronecker products, adjoint differentiation of the whole
// joint circuit treated as one operator, central finite differences, and a
// block-diagonal monolithic view of the split classical critic. The suites
// at the bottom report their worst deviation against a fixed tolerance.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eqmarl/critics.hpp"
#include "eqmarl/entangle.hpp"
#include "eqmarl/qsim.hpp"
#include "eqmarl/vqc.hpp"

namespace eqmarl::reference {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Cx = std::complex<double>;

/// Multiplies entry (0, 0) of one gate kind's 2x2 matrix by `scale`; used as
/// a negative control that the unitarity suite must catch.
struct GateCorruption {
  std::optional<GateKind> kind;
  double scale = 1.0;
};

inline CMat single_qubit_matrix(GateKind kind, double a, const GateCorruption& corrupt = {}) {
  const Cx i(0, 1);
  const double c = std::cos(a / 2), s = std::sin(a / 2);
  CMat m(2, 2);
  switch (kind) {
    case GateKind::X: m << 0, 1, 1, 0; break;
    case GateKind::Y: m << 0, -i, i, 0; break;
    case GateKind::Z: m << 1, 0, 0, -1; break;
    case GateKind::H: m << 1, 1, 1, -1; m /= std::sqrt(2.0); break;
    case GateKind::RX: m << c, -i * s, -i * s, c; break;
    case GateKind::RY: m << c, -s, s, c; break;
    case GateKind::RZ: m << std::exp(-i * (a / 2)), 0, 0, std::exp(i * (a / 2)); break;
    default: throw std::invalid_argument("not a single-qubit gate");
  }
  if (corrupt.kind && *corrupt.kind == kind) m(0, 0) *= corrupt.scale;
  return m;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// Tensor product with ops[q] acting on qubit q; qubit 0 is the least significant factor.
inline CMat embed(const std::vector<CMat>& ops) {
  CMat out = CMat::Identity(1, 1);
  for (int q = static_cast<int>(ops.size()) - 1; q >= 0; --q) out = kron(out, ops[q]);
  return out;
}

/// Full matrix of `g` on an n-qubit register. Controlled gates are written as
/// |0><0| (x) I + |1><1| (x) U on (control, target).
inline CMat full_matrix(const GateOp& g, int n, const GateCorruption& corrupt = {}) {
  const CMat id = CMat::Identity(2, 2);
  if (is_two_qubit(g.kind)) {
    CMat p0(2, 2), p1(2, 2);
    p0 << 1, 0, 0, 0;
    p1 << 0, 0, 0, 1;
    std::vector<CMat> a(n, id), b(n, id);
    a[g.targets[0]] = p0;
    b[g.targets[0]] = p1;
    b[g.targets[1]] = single_qubit_matrix(g.kind == GateKind::CNOT ? GateKind::X : GateKind::Z, 0.0, corrupt);
    return embed(a) + embed(b);
  }
  std::vector<CMat> ops(n, id);
  ops[g.targets[0]] = single_qubit_matrix(g.kind, g.angle.value_or(0.0), corrupt);
  return embed(ops);
}

inline CVec basis_zero(int n) {
  CVec v = CVec::Zero(Eigen::Index{1} << n);
  v(0) = 1;
  return v;
}

inline CVec to_dense(const StateVector& s) {
  CVec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

/// Diagonal of Z (x) ... (x) Z on every qubit: (-1)^popcount(index).
inline Eigen::VectorXd z_all_diagonal(int n) {
  Eigen::VectorXd d(Eigen::Index{1} << n);
  for (Eigen::Index b = 0; b < d.size(); ++b) d(b) = (std::popcount(static_cast<std::uint64_t>(b)) % 2) ? -1.0 : 1.0;
  return d;
}

// ---------------------------------------------------------------------------
// Joint circuit written out gate by gate from the layer definitions.

struct ProgramStep {
  GateOp op;
  int agent = -1;
  AngleRole role = AngleRole::None;
  int index = -1;  // VqcParams::index for Theta / Encoding steps
  double input = 0.0;  // encoding steps: the observation entry o
  double scale = 0.0;  // encoding steps: lambda
};

inline std::vector<ProgramStep> joint_program(EntanglementStyle style, int agents, std::span<const VqcParams> params,
                                              std::span<const ObservationMatrix> inputs, Squash phi) {
  const int d_count = params[0].qubits;
  QubitLayout layout{agents, d_count};
  std::vector<ProgramStep> prog;
  for (const auto& g : entangling_circuit(style, layout)) prog.push_back({g});
  const GateKind axes[3] = {GateKind::RX, GateKind::RY, GateKind::RZ};
  for (int n = 0; n < agents; ++n) {
    const VqcParams& p = params[n];
    const int off = n * d_count;
    auto var = [&](int l) {
      for (int d = 0; d < d_count; ++d)
        for (int i = 0; i < 3; ++i) {
          const int idx = VqcParams::index(d_count, l, d, i);
          prog.push_back({GateOp{axes[i], {off + d}, p.theta[idx]}, n, AngleRole::Theta, idx});
        }
    };
    for (int l = 0; l < p.layers; ++l) {
      var(l);
      if (d_count >= 2) {
        for (int d = 0; d + 1 < d_count; ++d) prog.push_back({GateOp::cz(off + d, off + d + 1), n});
        prog.push_back({GateOp::cz(off, off + d_count - 1), n});
      }
      for (int d = 0; d < d_count; ++d)
        for (int i = 0; i < 3; ++i) {
          const int idx = VqcParams::index(d_count, l, d, i);
          const double o = inputs[n].at(d, i);
          const double lam = p.lambda[idx];
          prog.push_back({GateOp{axes[i], {off + d}, squash(phi, lam * o)}, n, AngleRole::Encoding, idx, o, lam});
        }
    }
    var(p.layers);
  }
  return prog;
}

struct AdjointResult {
  double expectation = 0.0;
  /// d<Z...Z>/d(angle) per program step (zero for fixed gates).
  std::vector<double> dangle;
};

/// <Z...Z> of the program output and its derivative with respect to every
/// rotation angle, by reverse-mode sweep over dense matrices:
/// dE/da_k = 2 Re <chi_k| (-i/2) G_k |psi_k>, chi_k = U_{k+1}^+ ... U_K^+ Z|psi>.
inline AdjointResult adjoint_expectation(const std::vector<ProgramStep>& prog, int n) {
  std::vector<CMat> mats;
  mats.reserve(prog.size());
  for (const auto& s : prog) mats.push_back(full_matrix(s.op, n));
  std::vector<CVec> states;
  states.reserve(prog.size());
  CVec psi = basis_zero(n);
  for (const auto& m : mats) {
    psi = m * psi;
    states.push_back(psi);
  }
  const Eigen::VectorXd z = z_all_diagonal(n);
  AdjointResult out;
  out.expectation = (psi.adjoint() * z.asDiagonal() * psi)(0, 0).real();
  out.dangle.assign(prog.size(), 0.0);
  CVec chi = z.asDiagonal() * psi;
  for (int k = static_cast<int>(prog.size()) - 1; k >= 0; --k) {
    const auto& s = prog[k];
    if (is_rotation(s.op.kind)) {
      const GateKind pauli = s.op.kind == GateKind::RX ? GateKind::X : s.op.kind == GateKind::RY ? GateKind::Y : GateKind::Z;
      const CMat gen = full_matrix(GateOp{pauli, s.op.targets, std::nullopt}, n);
      const Cx v = chi.dot(Cx(0, -0.5) * (gen * states[k]));
      out.dangle[k] = 2.0 * v.real();
    }
    chi = mats[k].adjoint() * chi;
  }
  return out;
}

using GradientMap = std::map<std::string, std::vector<double>>;

/// Gradient of the mean Huber critic loss over (obs[t], targets[t]) for a
/// quantum critic, computed on the monolithic joint circuit. Keys are
/// parameter block names.
inline GradientMap monolithic_quantum_gradient(QuantumCritic& critic, std::span<const JointObservation> obs,
                                               std::span<const double> targets, double delta = 1.0) {
  GradientMap g;
  for (auto* b : critic.parameters()) g[b->name].assign(b->size(), 0.0);
  const int agents = critic.num_agents();
  const int d_count = critic.branch(0).qubits();
  const int n = agents * d_count;
  const double w = critic.scale();
  const Squash phi = critic.circuit().phi;
  const double inv = 1.0 / static_cast<double>(obs.size());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    std::vector<VqcParams> params;
    std::vector<ObservationMatrix> inputs;
    std::vector<Eigen::VectorXd> raw(agents);
    for (int a = 0; a < agents; ++a) {
      const QuantumBranch& br = critic.branch(a);
      params.push_back(br.params());
      if (br.has_encoder()) {
        const auto& enc = br.encoder();
        raw[a] = Eigen::Map<const Eigen::VectorXd>(obs[t][a].raw.data(), static_cast<Eigen::Index>(obs[t][a].raw.size()));
        Eigen::VectorXd y = Eigen::VectorXd::Map(enc.bias().value.data(), enc.out());
        for (int r = 0; r < enc.out(); ++r)
          for (int c = 0; c < enc.in(); ++c) y(r) += enc.weights().value[r * enc.in() + c] * raw[a](c);
        inputs.push_back(ObservationMatrix::from(d_count, std::vector<double>(y.data(), y.data() + y.size())));
      } else {
        inputs.push_back(obs[t][a].matrix);
      }
    }
    const auto prog = joint_program(critic.circuit().style, agents, params, inputs, phi);
    const auto adj = adjoint_expectation(prog, n);
    const double value = w * (1.0 + adj.expectation) / 2.0;
    const double dl_dv = std::clamp(value - targets[t], -delta, delta) * inv;
    g["critic.w"][0] += dl_dv * (1.0 + adj.expectation) / 2.0;
    const double dl_dx = dl_dv * w / 2.0;
    std::vector<std::vector<double>> dinput(agents, std::vector<double>(d_count * 3, 0.0));
    for (std::size_t k = 0; k < prog.size(); ++k) {
      const auto& s = prog[k];
      const std::string base = "critic.agent" + std::to_string(s.agent);
      if (s.role == AngleRole::Theta) {
        g[base + ".theta"][s.index] += dl_dx * adj.dangle[k];
      } else if (s.role == AngleRole::Encoding) {
        const double dz = dl_dx * adj.dangle[k] * squash_derivative(phi, s.scale * s.input);
        if (critic.branch(s.agent).lambda_trainable()) g[base + ".lambda"][s.index] += dz * s.input;
        dinput[s.agent][s.index % (d_count * 3)] += dz * s.scale;
      }
    }
    for (int a = 0; a < agents; ++a) {
      if (!critic.branch(a).has_encoder()) continue;
      const std::string base = "critic.agent" + std::to_string(a) + ".encoder";
      const int in = critic.branch(a).encoder().in();
      for (int r = 0; r < d_count * 3; ++r) {
        g[base + ".bias"][r] += dinput[a][r];
        for (int c = 0; c < in; ++c) g[base + ".kernel"][r * in + c] += dinput[a][r] * raw[a](c);
      }
    }
  }
  return g;
}

/// Gradient of the mean Huber loss for the split classical critic, computed
/// by treating the agents' branches as one block-diagonal first layer.
inline GradientMap monolithic_split_gradient(SplitClassicalCritic& critic, std::span<const JointObservation> obs,
                                             std::span<const double> targets, double delta = 1.0) {
  const int agents = critic.num_agents();
  const int h = critic.branch(0).out();
  const int in = critic.branch(0).in();
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(agents * h, agents * in);
  Eigen::VectorXd b1(agents * h);
  for (int a = 0; a < agents; ++a) {
    const auto& br = critic.branch(a);
    for (int r = 0; r < h; ++r) {
      b1(a * h + r) = br.bias().value[r];
      for (int c = 0; c < in; ++c) w1(a * h + r, a * in + c) = br.weights().value[r * in + c];
    }
  }
  const auto& head = critic.head();
  const Eigen::RowVectorXd w2 = Eigen::RowVectorXd::Map(head.weights().value.data(), agents * h);
  const double b2 = head.bias().value[0];
  const bool head_relu = head.activation() == Activation::ReLU;

  Eigen::MatrixXd gw1 = Eigen::MatrixXd::Zero(agents * h, agents * in);
  Eigen::VectorXd gb1 = Eigen::VectorXd::Zero(agents * h);
  Eigen::RowVectorXd gw2 = Eigen::RowVectorXd::Zero(agents * h);
  double gb2 = 0.0;
  const double inv = 1.0 / static_cast<double>(obs.size());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    Eigen::VectorXd x(agents * in);
    for (int a = 0; a < agents; ++a)
      for (int c = 0; c < in; ++c) x(a * in + c) = obs[t][a].raw[c];
    const Eigen::VectorXd pre1 = w1 * x + b1;
    const Eigen::VectorXd z = pre1.cwiseMax(0.0);
    const double pre2 = w2.dot(z) + b2;
    const double v = head_relu ? std::max(pre2, 0.0) : pre2;
    double d2 = std::clamp(v - targets[t], -delta, delta) * inv;
    if (head_relu && pre2 <= 0.0) d2 = 0.0;
    gw2 += d2 * z.transpose();
    gb2 += d2;
    const Eigen::VectorXd d1 = (pre1.array() > 0.0).select(d2 * w2.transpose(), 0.0);
    gw1 += d1 * x.transpose();
    gb1 += d1;
  }
  GradientMap g;
  for (int a = 0; a < agents; ++a) {
    const std::string base = "critic.agent" + std::to_string(a);
    auto& k = g[base + ".kernel"];
    auto& b = g[base + ".bias"];
    for (int r = 0; r < h; ++r) {
      b.push_back(gb1(a * h + r));
      for (int c = 0; c < in; ++c) k.push_back(gw1(a * h + r, a * in + c));
    }
  }
  g["critic.central.kernel"] = std::vector<double>(gw2.data(), gw2.data() + gw2.size());
  g["critic.central.bias"] = {gb2};
  return g;
}

/// Largest |a - b| between a critic's accumulated gradients and a reference map.
inline double max_gradient_gap(Critic& critic, const GradientMap& ref) {
  double worst = 0.0;
  for (auto* b : critic.parameters()) {
    const auto it = ref.find(b->name);
    if (it == ref.end() || it->second.size() != b->size()) return std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b->size(); ++i) worst = std::max(worst, std::abs(b->grad[i] - it->second[i]));
  }
  return worst;
}

/// |a - b| / max(|b|, floor); the floor keeps near-zero derivatives from
/// turning finite-difference noise into large relative errors.
inline double relative_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

// ---------------------------------------------------------------------------
// Random instances

inline VqcParams random_vqc(Rng& rng, int d, int l, bool lambda_trainable) {
  VqcParams p(d, l, lambda_trainable);
  for (auto& t : p.theta) t = uniform(rng, 0.0, 2 * std::numbers::pi);
  if (lambda_trainable)
    for (auto& x : p.lambda) x = uniform(rng, -1.5, 1.5);
  return p;
}

inline ObservationMatrix random_input(Rng& rng, int d) {
  auto o = ObservationMatrix::zeros(d);
  for (auto& v : o.values) v = uniform(rng, -2.0, 2.0);
  return o;
}

inline EntanglementStyle random_style(Rng& rng) {
  const EntanglementStyle all[] = {EntanglementStyle::None, EntanglementStyle::PhiPlus, EntanglementStyle::PhiMinus,
                                   EntanglementStyle::PsiPlus, EntanglementStyle::PsiMinus};
  return all[uniform_index(rng, 5)];
}

/// Random two-agent joint observation: a D x 3 matrix and a raw vector of `raw_size` entries each.
inline JointObservation random_joint_observation(Rng& rng, int agents, int d, int raw_size) {
  JointObservation obs(agents);
  for (auto& o : obs) {
    o.matrix = random_input(rng, d);
    o.raw.resize(raw_size);
    for (auto& v : o.raw) v = uniform(rng, -1.0, 1.0);
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteReport {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  int cases = 0;
  bool passed() const { return std::isfinite(max_error) && max_error < tolerance; }
};

/// Bell states for N=2, D=1 against their amplitude definitions, and the
/// N=3 GHZ state against the dense matrix product.
inline SuiteReport bell_suite(const GateCorruption& corrupt = {}) {
  SuiteReport r{"bell", 0.0, 1e-12, 0};
  const double s = 1.0 / std::sqrt(2.0);
  // Amplitudes at indices (q0 + 2 q1) with agent 1 on qubit 0.
  const std::pair<EntanglementStyle, std::array<double, 4>> bell[] = {
      {EntanglementStyle::PhiPlus, {s, 0, 0, s}},
      {EntanglementStyle::PhiMinus, {s, 0, 0, -s}},
      {EntanglementStyle::PsiPlus, {0, s, s, 0}},
      {EntanglementStyle::PsiMinus, {0, -s, s, 0}},
  };
  const QubitLayout pair{2, 1};
  for (const auto& [style, amps] : bell) {
    const auto state = prepare_entangled_input(style, pair);
    for (int b = 0; b < 4; ++b) r.max_error = std::max(r.max_error, std::abs(state[b] - Cx(amps[b], 0)));
    ++r.cases;
  }
  const QubitLayout three{3, 1};
  const CMat u = full_matrix(GateOp::cnot(0, 2), 3, corrupt) * full_matrix(GateOp::cnot(0, 1), 3, corrupt) *
                 full_matrix(GateOp::h(0), 3, corrupt);
  const CVec expected = u * basis_zero(3);
  const CVec got = to_dense(prepare_entangled_input(EntanglementStyle::PhiPlus, three));
  r.max_error = std::max(r.max_error, (got - expected).cwiseAbs().maxCoeff());
  ++r.cases;
  return r;
}

/// Random single-branch circuits (D <= 4, L <= 5): every dense gate matrix is
/// unitary, the simulated state equals the dense matrix product applied to
/// |0...0>, and the norm is preserved.
inline SuiteReport unitary_suite(int circuits = 200, std::uint64_t seed = 7, const GateCorruption& corrupt = {}) {
  SuiteReport r{"unitary", 0.0, 1e-10, 0};
  Rng rng(seed);
  for (int c = 0; c < circuits; ++c) {
    const int d = 1 + static_cast<int>(uniform_index(rng, 4));
    const int l = static_cast<int>(uniform_index(rng, 6));
    const auto params = random_vqc(rng, d, l, true);
    const auto input = random_input(rng, d);
    const auto gates = compile_u_vqc(params, input, Squash::Arctan, 0);
    StateVector s(d);
    run_gates(s, gates);
    CMat u = CMat::Identity(Eigen::Index{1} << d, Eigen::Index{1} << d);
    const CMat id = u;
    for (const auto& g : gates) {
      GateOp op{g.kind, is_two_qubit(g.kind) ? std::vector<int>{g.q0, g.q1} : std::vector<int>{g.q0}, g.angle};
      const CMat m = full_matrix(op, d, corrupt);
      r.max_error = std::max(r.max_error, (m.adjoint() * m - id).cwiseAbs().maxCoeff());
      u = m * u;
    }
    const CVec dense = u * basis_zero(d);
    r.max_error = std::max(r.max_error, (to_dense(s) - dense).cwiseAbs().maxCoeff());
    r.max_error = std::max(r.max_error, std::abs(s.norm_squared() - 1.0));
    ++r.cases;
  }
  return r;
}

/// Parameter-shift gradients of the two-agent joint expectation (theta,
/// lambda through the squash, and the observation entries) against central
/// finite differences. Reports the maximum relative error.
inline SuiteReport gradient_suite(int instances = 100, std::uint64_t seed = 11) {
  SuiteReport r{"gradient", 0.0, 1e-4, 0};
  Rng rng(seed);
  const double h = 1e-5;
  for (int k = 0; k < instances; ++k) {
    const int d = 1 + static_cast<int>(uniform_index(rng, 3));
    const int l = 1 + static_cast<int>(uniform_index(rng, 3));
    JointCircuitSpec spec{random_style(rng), {2, d}, Squash::Arctan};
    std::vector<VqcParams> params = {random_vqc(rng, d, l, true), random_vqc(rng, d, l, true)};
    std::vector<ObservationMatrix> inputs = {random_input(rng, d), random_input(rng, d)};
    const auto g = grad_expectation(spec, params, inputs, PauliZProduct::all(2 * d));
    auto fd = [&](double& x) {
      const double x0 = x;
      x = x0 + h;
      const double up = joint_expectation(spec, params, inputs);
      x = x0 - h;
      const double down = joint_expectation(spec, params, inputs);
      x = x0;
      return (up - down) / (2 * h);
    };
    for (int a = 0; a < 2; ++a) {
      for (std::size_t i = 0; i < params[a].theta.size(); ++i)
        r.max_error = std::max(r.max_error, relative_error(g.per_agent[a].theta[i], fd(params[a].theta[i])));
      for (std::size_t i = 0; i < params[a].lambda.size(); ++i)
        r.max_error = std::max(r.max_error, relative_error(g.per_agent[a].lambda[i], fd(params[a].lambda[i])));
      for (std::size_t i = 0; i < inputs[a].values.size(); ++i)
        r.max_error = std::max(r.max_error, relative_error(g.per_agent[a].obs[i], fd(inputs[a].values[i])));
    }
    ++r.cases;
  }
  return r;
}

struct SplitGaps {
  double quantum = 0.0;
  double classical = 0.0;
  int cases = 0;
};

/// Split (server factor x agent branch) critic gradients against the
/// monolithic references on random 2-step episodes, for encoder-free and
/// encoder quantum critics and for the split classical critic.
inline SplitGaps split_gaps(int episodes = 6, std::uint64_t seed = 13) {
  SplitGaps out;
  Rng rng(seed);
  for (int e = 0; e < episodes; ++e) {
    const bool encoder = e % 2 == 1;
    CriticSpec spec;
    spec.kind = CriticKind::EQMARL;
    spec.style = random_style(rng);
    spec.qubits = 2 + static_cast<int>(uniform_index(rng, 2));
    spec.layers = 1 + static_cast<int>(uniform_index(rng, 3));
    spec.encoder = encoder;
    spec.obs_size = 5;
    QuantumCritic qc(spec);
    qc.init(rng);
    qc.scale_block().value[0] = uniform(rng, 0.5, 3.0);
    for (int a = 0; a < 2; ++a)
      for (auto& x : qc.branch(a).lambda().value) x = encoder ? 1.0 : uniform(rng, -1.5, 1.5);
    std::vector<JointObservation> obs = {random_joint_observation(rng, 2, spec.qubits, spec.obs_size),
                                         random_joint_observation(rng, 2, spec.qubits, spec.obs_size)};
    std::vector<double> predicted, targets;
    for (const auto& o : obs) {
      predicted.push_back(qc.estimate(o).value);
      targets.push_back(predicted.back() + uniform(rng, -2.5, 2.5));
    }
    zero_grads(qc.parameters());
    critic_backward(qc, obs, predicted, targets);
    out.quantum = std::max(out.quantum, max_gradient_gap(qc, monolithic_quantum_gradient(qc, obs, targets)));

    CriticSpec cs;
    cs.kind = CriticKind::SCTDE;
    cs.obs_size = spec.obs_size;
    cs.hidden = 5;
    cs.head = e % 3 == 2 ? Activation::ReLU : Activation::Linear;
    SplitClassicalCritic sc(cs);
    sc.init(rng);
    for (auto* b : sc.parameters())
      if (b->name.ends_with(".bias"))
        for (auto& x : b->value) x = uniform(rng, -0.3, 0.3);
    std::vector<double> cpred, ctargets;
    for (const auto& o : obs) {
      cpred.push_back(sc.estimate(o).value);
      ctargets.push_back(cpred.back() + uniform(rng, -2.5, 2.5));
    }
    zero_grads(sc.parameters());
    critic_backward(sc, obs, cpred, ctargets);
    out.classical = std::max(out.classical, max_gradient_gap(sc, monolithic_split_gradient(sc, obs, ctargets)));
    ++out.cases;
  }
  return out;
}

inline constexpr double kSplitQuantumTolerance = 1e-8;
inline constexpr double kSplitClassicalTolerance = 1e-10;

inline SuiteReport split_quantum_suite(int episodes = 6, std::uint64_t seed = 13) {
  const auto gaps = split_gaps(episodes, seed);
  return {"split-quantum", gaps.quantum, kSplitQuantumTolerance, gaps.cases};
}

inline SuiteReport split_classical_suite(int episodes = 6, std::uint64_t seed = 13) {
  const auto gaps = split_gaps(episodes, seed);
  return {"split-classical", gaps.classical, kSplitClassicalTolerance, gaps.cases};
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"bell", "unitary", "gradient", "split-quantum", "split-classical"};
  return names;
}

inline SuiteReport run_suite(const std::string& name, const GateCorruption& corrupt = {}) {
  if (name == "bell") return bell_suite(corrupt);
  if (name == "unitary") return unitary_suite(200, 7, corrupt);
  if (name == "gradient") return gradient_suite();
  if (name == "split-quantum") return split_quantum_suite();
  if (name == "split-classical") return split_classical_suite();
  throw std::invalid_argument("unknown oracle suite '" + name + "'");
}

}  // namespace eqmarl::reference

#endif  // EQMARL_ORACLE_HPP
