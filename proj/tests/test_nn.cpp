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
#include <functional>
#include <vector>

#include "eqmarl/nn.hpp"

using namespace eqmarl;

namespace {

// Relative error with an absolute floor so near-zero gradients compare sanely.
double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Dense, IdentityLinearPassesInputThrough) {
  DenseLayer layer(3, 3, Activation::Linear, "id");
  for (int i = 0; i < 3; ++i) layer.weights().value[i * 3 + i] = 1.0;
  const Eigen::VectorXd x = vec({0.5, -2.0, 7.0});
  EXPECT_EQ(layer.forward(x), x);
}

TEST(Dense, ReluClipsNegativePreActivation) {
  DenseLayer layer(1, 2, Activation::ReLU, "r");
  layer.weights().value = {1.0, -1.0};
  const Eigen::VectorXd y = layer.forward(vec({3.0}));
  EXPECT_EQ(y(0), 3.0);
  EXPECT_EQ(y(1), 0.0);
}

TEST(Dense, TwoToOneArithmetic) {
  DenseLayer layer(2, 1, Activation::Linear, "s");
  layer.weights().value = {1.0, 1.0};
  EXPECT_EQ(layer.forward(vec({2.0, 3.0}))(0), 5.0);
}

TEST(Dense, ShapeMismatchThrows) {
  DenseLayer layer(2, 1, Activation::Linear, "s");
  EXPECT_THROW(layer.forward(vec({1.0, 2.0, 3.0})), std::invalid_argument);
  EXPECT_THROW(DenseLayer(0, 1, Activation::Linear, "z"), std::invalid_argument);
}

TEST(Dense, ParameterCountIsOutTimesInPlusOne) {
  EXPECT_EQ(DenseLayer(72, 12, Activation::ReLU, "a").parameter_count(), 12 * 73);
  EXPECT_EQ(DenseLayer(12, 1, Activation::Linear, "b").parameter_count(), 13);
}

TEST(Dense, ClassicalCriticCountsFromLayerSizes) {
  // 72 -> 12 -> 1 and 54 -> 12 -> 1 central critics.
  EXPECT_EQ(DenseLayer(72, 12, Activation::ReLU, "h").parameter_count() +
                DenseLayer(12, 1, Activation::Linear, "o").parameter_count(),
            889);
  EXPECT_EQ(DenseLayer(54, 12, Activation::ReLU, "h").parameter_count() +
                DenseLayer(12, 1, Activation::Linear, "o").parameter_count(),
            673);
}

TEST(Dense, GlorotInitIsBoundedWithZeroBias) {
  Rng rng(3);
  DenseLayer layer(10, 6, Activation::ReLU, "g");
  layer.bias().value.assign(6, 5.0);
  layer.init_glorot(rng);
  const double limit = std::sqrt(6.0 / 16.0);
  for (double w : layer.weights().value) EXPECT_LE(std::abs(w), limit);
  for (double b : layer.bias().value) EXPECT_EQ(b, 0.0);
}

TEST(Dense, SoftmaxSumsToOneAndSurvivesLargeLogits) {
  const Eigen::VectorXd p = softmax(vec({1000.0, 1001.0, -1000.0}));
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(1) / p(0), std::exp(1.0), 1e-12);
}

// Backprop vs central differences on random two-layer nets for each
// activation pairing and for both losses.
class DenseBackprop : public ::testing::TestWithParam<std::tuple<Activation, Activation>> {};

TEST_P(DenseBackprop, MatchesFiniteDifferences) {
  const auto [a1, a2] = GetParam();
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    DenseLayer l1(5, 4, a1, "l1");
    DenseLayer l2(4, 3, a2, "l2");
    l1.init_glorot(rng);
    l2.init_glorot(rng);
    for (auto& b : l1.bias().value) b = uniform(rng, -0.5, 0.5);
    for (auto& b : l2.bias().value) b = uniform(rng, -0.5, 0.5);
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = uniform(rng, -2, 2);
    const std::vector<double> target = {uniform(rng, -1, 1), uniform(rng, -3, 3), uniform(rng, -1, 1)};
    const double alpha = 0.3, adv = uniform(rng, -2, 2);
    const bool use_huber = trial % 2 == 0;

    auto loss = [&]() {
      const Eigen::VectorXd y = l2.forward(l1.forward(x));
      if (use_huber) return huber_loss(std::span<const double>(y.data(), 3), target);
      return actor_loss_term(adv, y(1), alpha) + 0.5 * y(0) * y(0);
    };

    DenseCache c1, c2;
    const Eigen::VectorXd y = l2.forward(l1.forward(x, &c1), &c2);
    Eigen::VectorXd dy = Eigen::VectorXd::Zero(3);
    if (use_huber) {
      const auto g = huber_gradient(std::span<const double>(y.data(), 3), target);
      for (int i = 0; i < 3; ++i) dy(i) = g[i];
    } else {
      dy(1) = actor_loss_term_dp(adv, y(1), alpha);
      dy(0) = y(0);
    }
    ParameterList params;
    l1.append_parameters(params);
    l2.append_parameters(params);
    zero_grads(params);
    l1.backward(c1, l2.backward(c2, dy));

    const double h = 1e-6;
    for (auto* block : params) {
      for (std::size_t i = 0; i < block->size(); ++i) {
        const double saved = block->value[i];
        block->value[i] = saved + h;
        const double up = loss();
        block->value[i] = saved - h;
        const double down = loss();
        block->value[i] = saved;
        const double fd = (up - down) / (2 * h);
        EXPECT_LT(rel_err(block->grad[i], fd), 1e-5) << block->name << "[" << i << "]";
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Activations, DenseBackprop,
                         ::testing::Values(std::make_tuple(Activation::ReLU, Activation::Linear),
                                           std::make_tuple(Activation::Linear, Activation::Softmax),
                                           std::make_tuple(Activation::ReLU, Activation::Softmax)));

TEST(Dense, BackwardReturnsInputGradient) {
  Rng rng(5);
  DenseLayer layer(3, 2, Activation::Linear, "x");
  layer.init_glorot(rng);
  DenseCache c;
  layer.forward(vec({0.1, 0.2, 0.3}), &c);
  const Eigen::VectorXd dx = layer.backward(c, vec({1.0, -1.0}));
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(dx(i), layer.weights().value[i] - layer.weights().value[3 + i], 1e-15);
  }
}

TEST(Huber, SpecExamples) {
  const std::vector<double> a = {1.0, 2.0};
  EXPECT_EQ(huber_loss(a, a), 0.0);
  EXPECT_DOUBLE_EQ(huber_loss(std::vector<double>{0.5}, std::vector<double>{0.0}), 0.125);
  EXPECT_DOUBLE_EQ(huber_loss(std::vector<double>{3.0}, std::vector<double>{0.0}), 2.5);
  EXPECT_DOUBLE_EQ(huber_loss(std::vector<double>{-3.0}, std::vector<double>{0.0}), 2.5);
}

TEST(Huber, MeanOverEntriesAndDelta) {
  EXPECT_DOUBLE_EQ(huber_loss(std::vector<double>{0.5, 3.0}, std::vector<double>{0.0, 0.0}), (0.125 + 2.5) / 2);
  EXPECT_DOUBLE_EQ(huber_loss(std::vector<double>{3.0}, std::vector<double>{0.0}, 2.0), 2.0 * 3.0 - 2.0);
}

TEST(Huber, GradientIsClippedError) {
  const auto g = huber_gradient(std::vector<double>{0.5, 3.0, -4.0}, std::vector<double>{0.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(g[0], 0.5 / 3);
  EXPECT_DOUBLE_EQ(g[1], 1.0 / 3);
  EXPECT_DOUBLE_EQ(g[2], -1.0 / 3);
}

TEST(Huber, RejectsBadInput) {
  EXPECT_THROW(huber_loss(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(huber_loss(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(ActorLoss, SpecExamples) {
  EXPECT_EQ(actor_loss(std::vector<double>{0.0}, std::vector<double>{0.3}, 0.0), 0.0);
  EXPECT_EQ(actor_loss(std::vector<double>{1.0}, std::vector<double>{1.0}, 0.0), 0.0);
  EXPECT_NEAR(actor_loss(std::vector<double>{1.0}, std::vector<double>{0.5}, 0.0), 0.6931471805599453, 1e-15);
}

TEST(ActorLoss, EntropyTermIsChosenActionOnly) {
  const double p = 0.25, alpha = 0.1;
  EXPECT_NEAR(actor_loss_term(0.0, p, alpha), alpha * (-p * std::log(p)), 1e-15);
}

TEST(ActorLoss, ZeroProbabilityIsClamped) {
  const double v = actor_loss_term(1.0, 0.0, 0.001);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -std::log(kProbabilityFloor) + 0.001 * (-kProbabilityFloor * std::log(kProbabilityFloor)), 1e-9);
  EXPECT_EQ(actor_loss_term_dp(1.0, 0.0, 0.001), 0.0);
}

TEST(ActorLoss, DerivativeMatchesFiniteDifference) {
  for (double p : {0.05, 0.3, 0.9}) {
    for (double a : {-1.5, 0.0, 2.0}) {
      const double h = 1e-7;
      const double fd = (actor_loss_term(a, p + h, 0.2) - actor_loss_term(a, p - h, 0.2)) / (2 * h);
      EXPECT_NEAR(actor_loss_term_dp(a, p, 0.2), fd, 1e-6);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParameterBlock b("p", {3}, 0.7);
  Adam adam;
  for (int i = 0; i < 5; ++i) adam.step({&b});
  for (double v : b.value) EXPECT_EQ(v, 0.7);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // At t = 1, m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
  ParameterBlock b("p", {3}, 1.0);
  b.learning_rate = 0.01;
  b.grad = {2.0, -0.5, 1e-3};
  Adam adam;
  adam.step({&b});
  EXPECT_NEAR(b.value[0], 1.0 - 0.01 * 2.0 / (2.0 + 1e-7), 1e-15);
  EXPECT_NEAR(b.value[1], 1.0 + 0.01 * 0.5 / (0.5 + 1e-7), 1e-15);
  EXPECT_NEAR(b.value[2], 1.0 - 0.01 * 1e-3 / (1e-3 + 1e-7), 1e-15);
}

TEST(Adam, MomentsDecayOnceGradientsStop) {
  ParameterBlock b("p", {1}, 0.0);
  b.grad = {1.0};
  Adam adam;
  adam.step({&b});
  const double m1 = adam.first_moments()[0][0], v1 = adam.second_moments()[0][0];
  b.grad = {0.0};
  for (int i = 0; i < 10; ++i) adam.step({&b});
  EXPECT_NEAR(adam.first_moments()[0][0], m1 * std::pow(0.9, 10), 1e-15);
  EXPECT_NEAR(adam.second_moments()[0][0], v1 * std::pow(0.999, 10), 1e-15);
  EXPECT_EQ(adam.steps(), 11);
}

TEST(Adam, MomentShapesMirrorParameters) {
  ParameterBlock a("a", {2, 3}), b("b", {4});
  Adam adam;
  adam.step({&a, &b});
  ASSERT_EQ(adam.first_moments().size(), 2u);
  EXPECT_EQ(adam.first_moments()[0].size(), 6u);
  EXPECT_EQ(adam.second_moments()[1].size(), 4u);
}

TEST(Adam, NonFiniteGradientThrowsWithoutUpdating) {
  ParameterBlock b("bad", {2}, 1.0);
  b.grad = {0.5, std::nan("")};
  Adam adam;
  EXPECT_THROW(adam.step({&b}), std::runtime_error);
  EXPECT_EQ(b.value[0], 1.0);
  EXPECT_EQ(adam.steps(), 0);
}

TEST(Checkpoint, RoundTripRestoresValues) {
  ParameterBlock a("a", {2}, 0.0), b("b", {1, 3}, 0.0);
  a.value = {0.1, 1.0 / 3.0};
  b.value = {-2.5, 1e-300, 7.0};
  const auto j = parameters_to_json({&a, &b});
  ParameterBlock a2("a", {2}), b2("b", {1, 3});
  parameters_from_json(nlohmann::json::parse(j.dump()), {&a2, &b2});
  EXPECT_EQ(a2.value, a.value);
  EXPECT_EQ(b2.value, b.value);
}

TEST(Checkpoint, RejectsMismatchedLayout) {
  ParameterBlock a("a", {2});
  const auto j = parameters_to_json({&a});
  ParameterBlock wrong_name("x", {2}), wrong_shape("a", {3});
  EXPECT_THROW(parameters_from_json(j, {&wrong_name}), std::runtime_error);
  EXPECT_THROW(parameters_from_json(j, {&wrong_shape}), std::runtime_error);
  EXPECT_THROW(parameters_from_json(j, {&a, &a}), std::runtime_error);
}

TEST(Random, UniformIndexCoversRangeWithoutBias) {
  Rng rng(1);
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 30000; ++i) ++hits[uniform_index(rng, 3)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}
