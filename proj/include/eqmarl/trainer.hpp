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

#ifndef EQMARL_TRAINER_HPP
#define EQMARL_TRAINER_HPP

// Multi-agent advantage actor-critic with a shared policy. Each epoch runs
// one episode, estimates joint values for every observation, forms
// Q_t = sum_n r_t + gamma V(o_{t+1}) and A_t = Q_t - V(o_t) for t in
// [0, len - 2], and takes one Adam step on each of actor and critic.

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eqmarl/actors.hpp"
#include "eqmarl/config.hpp"
#include "eqmarl/critics.hpp"
#include "eqmarl/envs.hpp"
#include "eqmarl/nn.hpp"

namespace eqmarl {

/// SplitMix64 finaliser; derives independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One episode of synchronized multi-agent interaction. Index t runs over
/// steps; observations are the ones the agents acted on.
struct Episode {
  std::vector<JointObservation> actor_obs;
  std::vector<JointObservation> critic_obs;
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<double>> rewards;
  /// Whether the agent was still playing when it acted at step t.
  std::vector<std::vector<bool>> active;
  std::vector<bool> terminal;
  std::vector<int> coins;
  std::vector<int> own_coins;

  int length() const { return static_cast<int>(actions.size()); }
  int num_agents() const { return rewards.empty() ? 0 : static_cast<int>(rewards.front().size()); }
};

/// How observations are presented to a model.
struct ObservationContract {
  bool quantum = false;
  int qubits = 4;
};

inline JointObservation observe_all(const Environment& env, const ObservationContract& contract) {
  JointObservation out;
  for (int n = 0; n < env.num_agents(); ++n) {
    const auto raw = env.observe(n);
    out.push_back(transform_observation(env.kind(), env.dynamics(), raw, contract.quantum, contract.qubits));
  }
  return out;
}

/// Plays one episode from the environment's current state. Every agent
/// samples from the shared policy on its own observation; finished agents
/// submit action 0 without querying the policy.
inline Episode rollout(Environment& env, const Actor& actor, const ObservationContract& actor_contract,
                       const ObservationContract& critic_contract, Rng& rng, int max_steps, bool greedy = false,
                       std::ostream* trajectory = nullptr) {
  Episode ep;
  const int n_agents = env.num_agents();
  const bool same = actor_contract.quantum == critic_contract.quantum;
  ep.coins.assign(n_agents, 0);
  ep.own_coins.assign(n_agents, 0);
  for (int step = 0; step < max_steps; ++step) {
    auto obs = observe_all(env, actor_contract);
    std::vector<int> actions(n_agents, 0);
    std::vector<bool> active(n_agents, true);
    for (int n = 0; n < n_agents; ++n) {
      active[n] = !env.agent_done(n);
      if (active[n]) actions[n] = policy_forward(actor, obs[n], rng, greedy).action;
    }
    ep.critic_obs.push_back(same ? obs : observe_all(env, critic_contract));
    ep.actor_obs.push_back(std::move(obs));
    const StepResult r = env.step(actions);
    if (trajectory) write_trajectory_line(*trajectory, env, actions, r);
    for (int n = 0; n < static_cast<int>(r.coins.size()); ++n) {
      ep.coins[n] += r.coins[n];
      ep.own_coins[n] += r.own_coins[n];
    }
    ep.actions.push_back(std::move(actions));
    ep.rewards.push_back(r.rewards);
    ep.active.push_back(std::move(active));
    ep.terminal.push_back(r.done);
    if (r.done) break;
  }
  return ep;
}

struct Targets {
  std::vector<double> q;
  std::vector<double> advantage;
};

/// Q_t = sum_n r_t^n + gamma * V_{t+1} (0 when step t ended the episode) and
/// A_t = Q_t - V_t for t in [0, len - 2]. `values` holds V(o_t) for every step.
inline Targets compute_targets(const std::vector<std::vector<double>>& rewards, std::span<const double> values,
                               const std::vector<bool>& terminal, double gamma) {
  const int len = static_cast<int>(rewards.size());
  if (static_cast<int>(values.size()) != len || static_cast<int>(terminal.size()) != len) {
    throw std::invalid_argument("targets need one value and terminal flag per step");
  }
  Targets out;
  for (int t = 0; t + 1 < len; ++t) {
    double r = 0.0;
    for (double x : rewards[t]) r += x;
    const double next = terminal[t] ? 0.0 : values[t + 1];
    out.q.push_back(r + gamma * next);
    out.advantage.push_back(out.q.back() - values[t]);
  }
  return out;
}

struct EpochLog {
  int epoch = 0;
  double score = 0.0;
  double total_coins = 0.0;
  double own_coin_rate = 0.0;
  double avg_reward = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  int episode_len = 0;
};

struct Metrics {
  double score = 0.0;
  double total_coins = 0.0;
  double own_coin_rate = 0.0;
  double avg_reward = 0.0;
};

/// Score (sum of all rewards), total coins, own-coin rate (0 when no coin was
/// collected) and per-agent average reward of a finished episode.
inline Metrics compute_metrics(const std::vector<std::vector<double>>& rewards, const std::vector<int>& coins = {},
                               const std::vector<int>& own_coins = {}) {
  Metrics m;
  std::size_t n_agents = 0;
  for (const auto& row : rewards) {
    n_agents = std::max(n_agents, row.size());
    for (double r : row) m.score += r;
  }
  int total = 0, own = 0;
  for (int c : coins) total += c;
  for (int c : own_coins) own += c;
  m.total_coins = total;
  m.own_coin_rate = total > 0 ? static_cast<double>(own) / total : 0.0;
  m.avg_reward = n_agents > 0 ? m.score / static_cast<double>(n_agents) : 0.0;
  return m;
}

inline const char* kCsvHeader = "epoch,score,total_coins,own_coin_rate,avg_reward,actor_loss,critic_loss,episode_len";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(const EpochLog& r) {
  return std::to_string(r.epoch) + "," + format_double(r.score) + "," + format_double(r.total_coins) + "," +
         format_double(r.own_coin_rate) + "," + format_double(r.avg_reward) + "," + format_double(r.actor_loss) +
         "," + format_double(r.critic_loss) + "," + std::to_string(r.episode_len);
}

// ---------------------------------------------------------------------------

inline std::unique_ptr<Critic> build_critic(const ExperimentConfig& c, const Environment& env) {
  CriticSpec s;
  s.kind = c.framework;
  s.style = c.entanglement;
  s.num_agents = env.num_agents();
  s.qubits = c.qubits;
  s.layers = c.layers;
  s.obs_size = env.observation_size();
  s.encoder = uses_encoder(c.env, c.dynamics);
  s.phi = c.squash;
  s.hidden = c.hidden;
  s.head = c.sctde_head;
  s.branch_rates = c.critic_rates.branch();
  s.scale_rate = c.critic_rates.head;
  s.classical_rate = c.classical_critic_rate;
  return make_critic(s);
}

inline std::unique_ptr<Actor> build_actor(const ExperimentConfig& c, const Environment& env) {
  if (quantum_actor(c)) {
    QuantumActorSpec s;
    s.qubits = c.qubits;
    s.layers = c.layers;
    s.num_actions = env.num_actions();
    s.encoder_inputs = uses_encoder(c.env, c.dynamics) ? env.observation_size() : 0;
    s.phi = c.squash;
    s.beta = c.beta;
    s.rates = c.actor_rates.branch();
    s.action_weight_rate = c.actor_rates.head;
    return std::make_unique<QuantumActor>(s);
  }
  ClassicalActorSpec s;
  s.obs_size = env.observation_size();
  s.hidden = c.hidden;
  s.num_actions = env.num_actions();
  s.learning_rate = c.classical_actor_rate;
  return std::make_unique<ClassicalActor>(s);
}

/// One training run: environment, shared actor, critic, optimizers and RNG.
class Trainer {
 public:
  Trainer(const ExperimentConfig& config, std::uint64_t seed)
      : config_(config),
        env_(make_environment(config.env, config.dynamics, mix_seed(seed ^ 0x656e76ULL), config.num_agents,
                              config.time_limit)),
        actor_(build_actor(config, *env_)),
        critic_(build_critic(config, *env_)),
        rng_(mix_seed(seed)) {
    Rng init_rng(mix_seed(seed ^ 0x696e6974ULL));
    actor_->init(init_rng);
    critic_->init(init_rng);
    actor_params_ = actor_->parameters();
    critic_params_ = critic_->parameters();
  }

  const ExperimentConfig& config() const { return config_; }
  Environment& env() { return *env_; }
  Actor& actor() { return *actor_; }
  Critic& critic() { return *critic_; }
  Rng& rng() { return rng_; }
  int epochs_done() const { return epochs_done_; }

  ObservationContract actor_contract() const { return {quantum_actor(config_), config_.qubits}; }
  ObservationContract critic_contract() const { return {is_quantum(config_.framework), config_.qubits}; }

  EpochLog train_epoch() {
    env_->reset();
    const Episode ep = rollout(*env_, *actor_, actor_contract(), critic_contract(), rng_, env_->time_limit());
    EpochLog log = update(ep);
    log.epoch = epochs_done_++;
    return log;
  }

  /// Losses and one optimizer step per model from a finished episode.
  EpochLog update(const Episode& ep) {
    EpochLog log;
    const Metrics m = compute_metrics(ep.rewards, ep.coins, ep.own_coins);
    log.score = m.score;
    log.total_coins = m.total_coins;
    log.own_coin_rate = m.own_coin_rate;
    log.avg_reward = m.avg_reward;
    log.episode_len = ep.length();
    if (ep.length() < 2) return log;

    std::vector<double> values;
    values.reserve(ep.critic_obs.size());
    for (const auto& o : ep.critic_obs) values.push_back(critic_->estimate(o).value);
    const Targets tg = compute_targets(ep.rewards, values, ep.terminal, config_.gamma);
    const std::size_t steps = tg.q.size();

    zero_grads(critic_params_);
    log.critic_loss = critic_backward(*critic_, std::span(ep.critic_obs).first(steps),
                                      std::span<const double>(values).first(steps), tg.q, config_.huber_delta);

    std::vector<ActorSample> samples;
    for (std::size_t t = 0; t < steps; ++t) {
      for (int n = 0; n < ep.num_agents(); ++n) {
        if (ep.active[t][n]) samples.push_back({&ep.actor_obs[t][n], ep.actions[t][n], tg.advantage[t]});
      }
    }
    zero_grads(actor_params_);
    log.actor_loss = actor_backward(*actor_, samples, config_.alpha, config_.entropy);

    if (!std::isfinite(log.critic_loss) || !std::isfinite(log.actor_loss)) {
      throw std::runtime_error("non-finite loss at epoch " + std::to_string(epochs_done_) +
                               " (actor " + format_double(log.actor_loss) + ", critic " +
                               format_double(log.critic_loss) + ")");
    }
    critic_opt_.step(critic_params_);
    actor_opt_.step(actor_params_);
    return log;
  }

  nlohmann::json checkpoint() const {
    return {{"epoch", epochs_done_},
            {"config", to_json(config_)},
            {"actor", parameters_to_json(actor_params_)},
            {"critic", parameters_to_json(critic_params_)}};
  }

  void load_checkpoint(const nlohmann::json& j) {
    parameters_from_json(j.at("actor"), actor_params_);
    parameters_from_json(j.at("critic"), critic_params_);
    epochs_done_ = j.value("epoch", 0);
  }

 private:
  ExperimentConfig config_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<Actor> actor_;
  std::unique_ptr<Critic> critic_;
  ParameterList actor_params_;
  ParameterList critic_params_;
  Adam actor_opt_;
  Adam critic_opt_;
  Rng rng_;
  int epochs_done_ = 0;
};

}  // namespace eqmarl

#endif  // EQMARL_TRAINER_HPP
