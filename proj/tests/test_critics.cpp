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
#include <vector>

#include "eqmarl/critics.hpp"
#include "eqmarl/oracle.hpp"
#include "eqmarl/trainer.hpp"

using namespace eqmarl;

namespace {

CriticSpec quantum_spec(EntanglementStyle style, int d, int l, bool encoder = false, int obs_size = 6) {
  CriticSpec s;
  s.kind = CriticKind::EQMARL;
  s.style = style;
  s.qubits = d;
  s.layers = l;
  s.encoder = encoder;
  s.obs_size = obs_size;
  return s;
}

JointObservation zero_matrix_obs(int agents, int d) {
  JointObservation obs(agents);
  for (auto& o : obs) o.matrix = ObservationMatrix::zeros(d);
  return obs;
}

ParameterCount counts_for(EnvKind env, Dynamics dyn, CriticKind kind) {
  const auto cfg = default_config(env, dyn, kind);
  const auto e = make_environment(cfg.env, cfg.dynamics, 1);
  return build_critic(cfg, *e)->count();
}

}  // namespace

TEST(QuantumCritic, NoneStyleZeroParametersGivesValueOne) {
  QuantumCritic c(quantum_spec(EntanglementStyle::None, 2, 2));
  const auto v = c.estimate(zero_matrix_obs(2, 2));
  EXPECT_NEAR(*v.expectation, 1.0, 1e-14);
  EXPECT_NEAR(v.value, 1.0, 1e-14);
}

TEST(QuantumCritic, PsiPlusPairHasOddParity) {
  QuantumCritic c(quantum_spec(EntanglementStyle::PsiPlus, 1, 1));
  const auto v = c.estimate(zero_matrix_obs(2, 1));
  EXPECT_NEAR(*v.expectation, -1.0, 1e-14);
  EXPECT_NEAR(v.value, 0.0, 1e-14);
}

TEST(QuantumCritic, ValueStaysWithinZeroAndScale) {
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    QuantumCritic c(quantum_spec(reference::random_style(rng), 2, 2));
    c.init(rng);
    c.scale_block().value[0] = uniform(rng, 0.1, 5.0);
    const auto obs = reference::random_joint_observation(rng, 2, 2, 6);
    const auto v = c.estimate(obs);
    EXPECT_GE(*v.expectation, -1.0 - 1e-12);
    EXPECT_LE(*v.expectation, 1.0 + 1e-12);
    EXPECT_GE(v.value, -1e-12);
    EXPECT_LE(v.value, c.scale() + 1e-12);
    EXPECT_DOUBLE_EQ(v.value, c.scale() * (1.0 + *v.expectation) / 2.0);
  }
}

TEST(QuantumCritic, NoneStyleMatchesCentralQuantumBitExactly) {
  Rng rng(4);
  auto spec = quantum_spec(EntanglementStyle::None, 3, 2);
  QuantumCritic split(spec);
  spec.kind = CriticKind::QFCTDE;
  spec.style = EntanglementStyle::PsiMinus;  // ignored for the central variant
  QuantumCritic central(spec);
  split.init(rng);
  auto a = split.parameters(), b = central.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) b[i]->value = a[i]->value;
  for (int k = 0; k < 10; ++k) {
    const auto obs = reference::random_joint_observation(rng, 2, 3, 6);
    EXPECT_EQ(split.estimate(obs).value, central.estimate(obs).value);
  }
}

TEST(QuantumCritic, NoneStyleFactorsIntoAgentExpectations) {
  // Without input entanglement the joint state is a product, so <Z...Z>
  // is the product of each agent's own <Z...Z>.
  Rng rng(8);
  QuantumCritic c(quantum_spec(EntanglementStyle::None, 2, 3));
  c.init(rng);
  const auto obs = reference::random_joint_observation(rng, 2, 2, 6);
  double product = 1.0;
  for (int n = 0; n < 2; ++n) {
    StateVector s(2);
    run_gates(s, compile_u_vqc(c.branch(n).params(), obs[n].matrix, Squash::Arctan, 0));
    product *= expectation_z_mask(s, 0b11);
  }
  EXPECT_NEAR(*c.estimate(obs).expectation, product, 1e-13);
}

TEST(QuantumCritic, CentralBlockIsOneScalar) {
  QuantumCritic c(quantum_spec(EntanglementStyle::PsiPlus, 4, 5));
  const auto params = c.parameters();
  EXPECT_EQ(params.back()->name, "critic.w");
  EXPECT_EQ(params.back()->size(), 1u);
  EXPECT_EQ(c.count().central, 1);
}

TEST(QuantumCritic, RejectsWrongAgentCountAndShapes) {
  QuantumCritic c(quantum_spec(EntanglementStyle::PsiPlus, 2, 1));
  EXPECT_THROW(c.estimate(zero_matrix_obs(1, 2)), std::invalid_argument);
  EXPECT_THROW(c.estimate(zero_matrix_obs(2, 3)), std::invalid_argument);
  QuantumCritic e(quantum_spec(EntanglementStyle::PsiPlus, 2, 1, true, 6));
  JointObservation bad(2);
  for (auto& o : bad) o.raw.assign(5, 0.0);
  EXPECT_THROW(e.estimate(bad), std::invalid_argument);
}

TEST(QuantumCritic, PerfectPredictionGivesZeroGradients) {
  Rng rng(3);
  QuantumCritic c(quantum_spec(EntanglementStyle::PsiPlus, 2, 2, true));
  c.init(rng);
  std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 2, 2, 6),
                                       reference::random_joint_observation(rng, 2, 2, 6)};
  std::vector<double> v;
  for (const auto& o : obs) v.push_back(c.estimate(o).value);
  zero_grads(c.parameters());
  EXPECT_EQ(critic_backward(c, obs, v, v), 0.0);
  for (auto* b : c.parameters())
    for (double g : b->grad) EXPECT_EQ(g, 0.0) << b->name;
}

TEST(QuantumCritic, ScaleGradientIsHalfOnePlusExpectation) {
  Rng rng(6);
  QuantumCritic c(quantum_spec(EntanglementStyle::PhiPlus, 2, 1));
  c.init(rng);
  const std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 2, 2, 6)};
  const auto est = c.estimate(obs[0]);
  const std::vector<double> pred = {est.value}, target = {est.value - 0.4};
  zero_grads(c.parameters());
  critic_backward(c, obs, pred, target);
  EXPECT_NEAR(c.scale_block().grad[0], 0.4 * (1.0 + *est.expectation) / 2.0, 1e-14);
}

// Split (server factor x agent branch) gradients against the monolithic
// adjoint-differentiated joint circuit.
class SplitQuantum : public ::testing::TestWithParam<std::tuple<EntanglementStyle, bool>> {};

TEST_P(SplitQuantum, MatchesMonolithicGradient) {
  const auto [style, encoder] = GetParam();
  Rng rng(100 + static_cast<int>(style) * 2 + encoder);
  for (int trial = 0; trial < 3; ++trial) {
    QuantumCritic c(quantum_spec(style, 2 + trial % 2, 2, encoder, 5));
    c.init(rng);
    c.scale_block().value[0] = uniform(rng, 0.5, 4.0);
    if (!encoder)
      for (int n = 0; n < 2; ++n)
        for (auto& x : c.branch(n).lambda().value) x = uniform(rng, -1.5, 1.5);
    const int d = c.branch(0).qubits();
    std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 2, d, 5),
                                         reference::random_joint_observation(rng, 2, d, 5)};
    std::vector<double> pred, target;
    for (const auto& o : obs) {
      pred.push_back(c.estimate(o).value);
      target.push_back(pred.back() + uniform(rng, -3.0, 3.0));
    }
    zero_grads(c.parameters());
    critic_backward(c, obs, pred, target);
    EXPECT_LT(reference::max_gradient_gap(c, reference::monolithic_quantum_gradient(c, obs, target)), 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(Styles, SplitQuantum,
                         ::testing::Combine(::testing::Values(EntanglementStyle::None, EntanglementStyle::PhiPlus,
                                                              EntanglementStyle::PhiMinus, EntanglementStyle::PsiPlus,
                                                              EntanglementStyle::PsiMinus),
                                            ::testing::Bool()));

TEST(SplitQuantum, ThreeAgentsMatchMonolithicGradient) {
  Rng rng(77);
  auto spec = quantum_spec(EntanglementStyle::PsiPlus, 2, 1);
  spec.num_agents = 3;
  QuantumCritic c(spec);
  c.init(rng);
  std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 3, 2, 6),
                                       reference::random_joint_observation(rng, 3, 2, 6)};
  const std::vector<double> pred = {c.estimate(obs[0]).value, c.estimate(obs[1]).value};
  const std::vector<double> target = {pred[0] + 0.3, pred[1] - 2.0};
  zero_grads(c.parameters());
  critic_backward(c, obs, pred, target);
  EXPECT_LT(reference::max_gradient_gap(c, reference::monolithic_quantum_gradient(c, obs, target)), 1e-8);
}

TEST(SplitClassical, MatchesBlockDiagonalBackprop) {
  Rng rng(55);
  for (Activation head : {Activation::Linear, Activation::ReLU}) {
    for (int trial = 0; trial < 5; ++trial) {
      CriticSpec s;
      s.kind = CriticKind::SCTDE;
      s.obs_size = 9;
      s.hidden = 6;
      s.head = head;
      SplitClassicalCritic c(s);
      c.init(rng);
      for (auto* b : c.parameters())
        if (b->name.ends_with(".bias"))
          for (auto& x : b->value) x = uniform(rng, -0.2, 0.4);
      std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 2, 1, 9),
                                           reference::random_joint_observation(rng, 2, 1, 9)};
      std::vector<double> pred, target;
      for (const auto& o : obs) {
        pred.push_back(c.estimate(o).value);
        target.push_back(pred.back() + uniform(rng, -3.0, 3.0));
      }
      zero_grads(c.parameters());
      critic_backward(c, obs, pred, target);
      EXPECT_LT(reference::max_gradient_gap(c, reference::monolithic_split_gradient(c, obs, target)), 1e-10);
    }
  }
}

TEST(SplitClassical, CentralHeadHasTwentyFiveParameters) {
  CriticSpec s;
  s.kind = CriticKind::SCTDE;
  SplitClassicalCritic c(s);
  EXPECT_EQ(c.head().parameter_count(), 25);
  EXPECT_THROW(([] {
                 CriticSpec bad;
                 bad.kind = CriticKind::SCTDE;
                 bad.head = Activation::Softmax;
                 SplitClassicalCritic x(bad);
               }()),
               std::invalid_argument);
}

TEST(FullyCentral, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  CriticSpec s;
  s.kind = CriticKind::FCTDE;
  s.obs_size = 4;
  s.hidden = 5;
  FullyCentralCritic c(s);
  c.init(rng);
  for (auto& b : c.hidden().bias().value) b = uniform(rng, 0.05, 0.3);
  std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 2, 1, 4),
                                       reference::random_joint_observation(rng, 2, 1, 4),
                                       reference::random_joint_observation(rng, 2, 1, 4)};
  const std::vector<double> target = {0.7, -2.5, 3.1};
  auto loss = [&]() {
    std::vector<double> v;
    for (const auto& o : obs) v.push_back(c.estimate(o).value);
    return huber_loss(v, target);
  };
  std::vector<double> pred;
  for (const auto& o : obs) pred.push_back(c.estimate(o).value);
  zero_grads(c.parameters());
  critic_backward(c, obs, pred, target);
  const double h = 1e-6;
  for (auto* b : c.parameters()) {
    for (std::size_t i = 0; i < b->size(); ++i) {
      const double x0 = b->value[i];
      b->value[i] = x0 + h;
      const double up = loss();
      b->value[i] = x0 - h;
      const double down = loss();
      b->value[i] = x0;
      EXPECT_LT(reference::relative_error(b->grad[i], (up - down) / (2 * h), 1e-2), 1e-5) << b->name << i;
    }
  }
}

TEST(FullyCentral, HasNoPerAgentBlock) {
  CriticSpec s;
  s.kind = CriticKind::FCTDE;
  const auto c = make_critic(s);
  EXPECT_EQ(c->count().per_agent, 0);
  EXPECT_EQ(c->count().central, c->count().total);
}

TEST(QuantumCriticEncoder, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  QuantumCritic c(quantum_spec(EntanglementStyle::PsiMinus, 2, 2, true, 4));
  c.init(rng);
  std::vector<JointObservation> obs = {reference::random_joint_observation(rng, 2, 2, 4),
                                       reference::random_joint_observation(rng, 2, 2, 4)};
  const std::vector<double> target = {0.9, 0.1};
  auto loss = [&]() {
    std::vector<double> v;
    for (const auto& o : obs) v.push_back(c.estimate(o).value);
    return huber_loss(v, target);
  };
  std::vector<double> pred;
  for (const auto& o : obs) pred.push_back(c.estimate(o).value);
  zero_grads(c.parameters());
  critic_backward(c, obs, pred, target);
  const double h = 1e-5;
  for (auto* b : c.parameters()) {
    for (std::size_t i = 0; i < b->size(); ++i) {
      const double x0 = b->value[i];
      b->value[i] = x0 + h;
      const double up = loss();
      b->value[i] = x0 - h;
      const double down = loss();
      b->value[i] = x0;
      EXPECT_LT(reference::relative_error(b->grad[i], (up - down) / (2 * h)), 1e-4) << b->name << i;
    }
  }
}

TEST(ParameterCounts, CoinGameTable) {
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::MDP, CriticKind::EQMARL), (ParameterCount{132, 1, 265}));
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::MDP, CriticKind::QFCTDE), (ParameterCount{0, 265, 265}));
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::MDP, CriticKind::FCTDE), (ParameterCount{0, 889, 889}));
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::MDP, CriticKind::SCTDE), (ParameterCount{444, 25, 913}));
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::POMDP, CriticKind::EQMARL), (ParameterCount{408, 1, 817}));
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::POMDP, CriticKind::FCTDE), (ParameterCount{0, 673, 673}));
  EXPECT_EQ(counts_for(EnvKind::CoinGame, Dynamics::POMDP, CriticKind::SCTDE), (ParameterCount{336, 25, 697}));
}

TEST(ParameterCounts, MiniGridTable) {
  EXPECT_EQ(counts_for(EnvKind::MiniGrid, Dynamics::POMDP, CriticKind::EQMARL), (ParameterCount{1848, 1, 3697}));
  EXPECT_EQ(counts_for(EnvKind::MiniGrid, Dynamics::POMDP, CriticKind::FCTDE), (ParameterCount{0, 29601, 29601}));
  EXPECT_EQ(counts_for(EnvKind::MiniGrid, Dynamics::POMDP, CriticKind::SCTDE), (ParameterCount{14800, 201, 29801}));
}

TEST(ParameterCounts, TotalsMatchParameterBlocks) {
  for (auto kind : {CriticKind::EQMARL, CriticKind::QFCTDE, CriticKind::FCTDE, CriticKind::SCTDE}) {
    for (auto dyn : {Dynamics::MDP, Dynamics::POMDP}) {
      const auto cfg = default_config(EnvKind::CoinGame, dyn, kind);
      const auto e = make_environment(cfg.env, cfg.dynamics, 1);
      auto c = build_critic(cfg, *e);
      EXPECT_EQ(static_cast<int>(count_parameters(c->parameters())), c->count().total);
    }
  }
}

TEST(MakeCritic, RejectsEmptyAgentSet) {
  CriticSpec s;
  s.num_agents = 0;
  EXPECT_THROW(make_critic(s), std::invalid_argument);
}

TEST(EstimateJointValue, DelegatesToCritic) {
  Rng rng(2);
  CriticSpec s;
  s.kind = CriticKind::SCTDE;
  s.obs_size = 3;
  auto c = make_critic(s);
  c->init(rng);
  const auto obs = reference::random_joint_observation(rng, 2, 1, 3);
  EXPECT_EQ(estimate_joint_value(*c, obs).value, c->estimate(obs).value);
  EXPECT_FALSE(estimate_joint_value(*c, obs).expectation.has_value());
}
