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

#include <gtest/gtest.h>

#include <cmath>

#include "eqmarl/entangle.hpp"
#include "support/dense_oracle.hpp"

using namespace eqmarl;

namespace {

const double r = 1.0 / std::sqrt(2.0);

// Two-qubit Bell amplitudes indexed by (a, b) where a is agent 1's bit.
double bell(EntanglementStyle s, int a, int b) {
  switch (s) {
    case EntanglementStyle::PhiPlus: return a == b ? r : 0.0;
    case EntanglementStyle::PhiMinus: return a == b ? (a == 0 ? r : -r) : 0.0;
    case EntanglementStyle::PsiPlus: return a != b ? r : 0.0;
    case EntanglementStyle::PsiMinus: return a != b ? (a == 0 ? r : -r) : 0.0;
    case EntanglementStyle::None: return (a == 0 && b == 0) ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

TEST(Delta, ZeroBasedIndices) {
  QubitLayout layout{2, 4};
  EXPECT_EQ(delta(1, 1, layout), 0);
  EXPECT_EQ(delta(2, 1, layout), 4);
  EXPECT_EQ(delta(2, 4, layout), 7);
}

TEST(Delta, OutOfRange) {
  QubitLayout layout{2, 4};
  EXPECT_THROW(delta(0, 1, layout), std::out_of_range);
  EXPECT_THROW(delta(3, 1, layout), std::out_of_range);
  EXPECT_THROW(delta(1, 0, layout), std::out_of_range);
  EXPECT_THROW(delta(1, 5, layout), std::out_of_range);
}

TEST(Layout, Validation) {
  EXPECT_THROW((QubitLayout{1, 4}.validate()), std::invalid_argument);
  EXPECT_THROW((QubitLayout{2, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((QubitLayout{5, 5}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((QubitLayout{3, 8}.validate()));
}

TEST(EntanglementStyle, RoundTripsNames) {
  for (auto s : kAllEntanglementStyles) EXPECT_EQ(parse_entanglement_style(to_string(s)), s);
  EXPECT_THROW(parse_entanglement_style("bell"), std::invalid_argument);
}

TEST(PrepareEntangledInput, PsiPlusTwoAgents) {
  auto s = prepare_entangled_input(EntanglementStyle::PsiPlus, {2, 1});
  EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[1] - Complex(r, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[2] - Complex(r, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[3]), 0.0, 1e-15);
}

TEST(PrepareEntangledInput, PhiMinusTwoAgents) {
  auto s = prepare_entangled_input(EntanglementStyle::PhiMinus, {2, 1});
  EXPECT_NEAR(std::abs(s[0] - Complex(r, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[3] - Complex(-r, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[1]) + std::abs(s[2]), 0.0, 1e-15);
}

TEST(PrepareEntangledInput, AllBellStatesMatchDefinitions) {
  for (auto style : kAllEntanglementStyles) {
    auto s = prepare_entangled_input(style, {2, 1});
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        EXPECT_NEAR(std::abs(s[a + 2 * b] - Complex(bell(style, a, b), 0)), 0.0, 1e-12) << to_string(style);
  }
}

TEST(PrepareEntangledInput, GhzThreeAgentsMatchesMatrixProduct) {
  const int n = 3;
  oracle::Mat u = oracle::full_matrix(GateOp::cnot(0, 2), n) * oracle::full_matrix(GateOp::cnot(0, 1), n) *
                  oracle::full_matrix(GateOp::h(0), n);
  const oracle::Vec expected = u * oracle::zero(n);
  EXPECT_NEAR(std::abs(expected(0) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(expected(7) - r), 0.0, 1e-15);
  auto s = prepare_entangled_input(EntanglementStyle::PhiPlus, {3, 1});
  EXPECT_LT(oracle::max_abs_diff(oracle::to_vec(s), expected), 1e-12);
}

TEST(PrepareEntangledInput, PsiStylesForThreeAgentsMatchMatrixProduct) {
  const QubitLayout layout{3, 2};
  for (auto style : kAllEntanglementStyles) {
    oracle::Mat u = oracle::Mat::Identity(64, 64);
    for (const auto& g : entangling_circuit(style, layout)) u = oracle::full_matrix(g, 6) * u;
    auto s = prepare_entangled_input(style, layout);
    EXPECT_LT(oracle::max_abs_diff(oracle::to_vec(s), u * oracle::zero(6)), 1e-12);
  }
}

TEST(EntangleProperty, PairsAreIndependentBellStates) {
  for (int d_count : {1, 2, 4}) {
    const QubitLayout layout{2, d_count};
    for (auto style : kAllEntanglementStyles) {
      auto s = prepare_entangled_input(style, layout);
      double worst = 0.0;
      for (std::size_t b = 0; b < s.dim(); ++b) {
        double expected = 1.0;
        for (int d = 0; d < d_count; ++d) {
          expected *= bell(style, (b >> d) & 1, (b >> (d_count + d)) & 1);
        }
        worst = std::max(worst, std::abs(s[b] - Complex(expected, 0)));
      }
      EXPECT_LT(worst, 1e-12) << to_string(style) << " D=" << d_count;
      EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    }
  }
}

TEST(EntangleProperty, NoneIsZeroStateBitExact) {
  auto s = prepare_entangled_input(EntanglementStyle::None, {2, 4});
  auto z = zero_state(8);
  for (std::size_t b = 0; b < s.dim(); ++b) EXPECT_EQ(s[b], z[b]);
}

TEST(CouplingGates, OrderIsXLayerThenHadamardThenFanOut) {
  const auto gates = coupling_gates(EntanglementStyle::PsiMinus, 2, {3, 2});
  ASSERT_EQ(gates.size(), 6u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(gates[i].kind, GateKind::X);
  EXPECT_EQ(gates[3].kind, GateKind::H);
  EXPECT_EQ(gates[3].targets[0], 1);
  EXPECT_EQ(gates[4].targets, (std::vector<int>{1, 3}));
  EXPECT_EQ(gates[5].targets, (std::vector<int>{1, 5}));
}
