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

#ifndef EQMARL_CONFIG_HPP
#define EQMARL_CONFIG_HPP

// Declarative experiment description. Stored as JSON; any field can be
// overridden with a dotted key path, e.g. `epochs=100` or `lr.critic.theta=0.02`.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eqmarl/actors.hpp"
#include "eqmarl/critics.hpp"
#include "eqmarl/entangle.hpp"
#include "eqmarl/envs.hpp"
#include "eqmarl/nn.hpp"
#include "eqmarl/vqc.hpp"

namespace eqmarl {

/// Invalid configuration; `key` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Learning rates of a quantum model by parameter group. `head` is the
/// critic's scale w or the actor's action weights.
struct QuantumRates {
  double theta = 0.01;
  double lambda = 0.1;
  double encoder_weights = 0.1;
  double encoder_bias = 0.1;
  double head = 0.1;

  BranchRates branch() const { return {theta, lambda, encoder_weights, encoder_bias}; }
  bool operator==(const QuantumRates&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  CriticKind framework = CriticKind::EQMARL;
  EntanglementStyle entanglement = EntanglementStyle::PsiPlus;
  EnvKind env = EnvKind::CoinGame;
  Dynamics dynamics = Dynamics::MDP;
  int num_agents = 2;
  /// 0 selects the environment's own limit.
  int time_limit = 0;
  int epochs = 3000;
  double gamma = 0.99;
  double alpha = 0.001;
  EntropyMode entropy = EntropyMode::ChosenAction;
  double huber_delta = 1.0;
  int qubits = 4;
  int layers = 5;
  int hidden = 12;
  double beta = 1.0;
  Squash squash = Squash::Arctan;
  Activation sctde_head = Activation::Linear;
  QuantumRates critic_rates;
  QuantumRates actor_rates;
  double classical_critic_rate = 1e-3;
  double classical_actor_rate = 1e-3;
  std::uint64_t seed = 0;
  int seeds = 1;
  std::string output_dir = "runs";
  int checkpoint_every = 0;
  int workers = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for an (environment, dynamics, framework) triple.
inline ExperimentConfig default_config(EnvKind env, Dynamics dynamics, CriticKind framework) {
  ExperimentConfig c;
  c.env = env;
  c.dynamics = dynamics;
  c.framework = framework;
  c.name = to_string(env) + "_" + to_string(dynamics) + "_" + to_string(framework);
  if (env == EnvKind::CartPole) c.epochs = 1000;
  if (env == EnvKind::MiniGrid) {
    c.dynamics = Dynamics::POMDP;
    c.hidden = 100;
    c.critic_rates = {0.01, 0.1, 0.001, 0.001, 0.1};
    c.classical_critic_rate = 1e-4;
    c.classical_actor_rate = 1e-4;
  }
  return c;
}

/// Whether the experiment's actor is the quantum softmax-VQC policy.
inline bool quantum_actor(const ExperimentConfig& c) { return is_quantum(c.framework) && c.env != EnvKind::MiniGrid; }

namespace detail {

inline std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::ReLU: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "linear";
}

inline nlohmann::json rates_json(const QuantumRates& r, const char* head_name) {
  return {{"theta", r.theta},
          {"lambda", r.lambda},
          {"encoder_weights", r.encoder_weights},
          {"encoder_bias", r.encoder_bias},
          {head_name, r.head}};
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"name", c.name},
          {"framework", to_string(c.framework)},
          {"entanglement", to_string(c.entanglement)},
          {"env", to_string(c.env)},
          {"dynamics", to_string(c.dynamics)},
          {"num_agents", c.num_agents},
          {"time_limit", c.time_limit},
          {"epochs", c.epochs},
          {"gamma", c.gamma},
          {"alpha", c.alpha},
          {"entropy", c.entropy == EntropyMode::ChosenAction ? "chosen-action" : "full-distribution"},
          {"huber_delta", c.huber_delta},
          {"qubits", c.qubits},
          {"layers", c.layers},
          {"hidden", c.hidden},
          {"beta", c.beta},
          {"squash", c.squash == Squash::Arctan ? "arctan" : "identity"},
          {"sctde_head", detail::activation_name(c.sctde_head)},
          {"lr",
           {{"critic", detail::rates_json(c.critic_rates, "scale")},
            {"actor", detail::rates_json(c.actor_rates, "action_weights")},
            {"classical_critic", c.classical_critic_rate},
            {"classical_actor", c.classical_actor_rate}}},
          {"seed", c.seed},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir},
          {"checkpoint_every", c.checkpoint_every},
          {"workers", c.workers}};
}

namespace detail {

template <typename T>
T get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "has the wrong type (" + std::string(j.type_name()) + ")");
  }
}

template <typename F>
auto parse_enum(const nlohmann::json& j, const std::string& key, F&& parse) {
  try {
    return parse(get<std::string>(j, key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

inline void read_rates(const nlohmann::json& j, const std::string& prefix, const char* head_name, QuantumRates& r) {
  if (!j.is_object()) throw ConfigError(prefix, "must be an object");
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix + "." + k;
    if (k == "theta") r.theta = get<double>(v, key);
    else if (k == "lambda") r.lambda = get<double>(v, key);
    else if (k == "encoder_weights") r.encoder_weights = get<double>(v, key);
    else if (k == "encoder_bias") r.encoder_bias = get<double>(v, key);
    else if (k == head_name) r.head = get<double>(v, key);
    else throw ConfigError(key, "unknown key");
  }
}

}  // namespace detail

/// Builds a config from JSON: environment/dynamics/framework select the
/// defaults, then every other key overrides them. Unknown keys are errors.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::get;
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  const auto env = j.contains("env") ? detail::parse_enum(j["env"], "env", parse_env_kind) : EnvKind::CoinGame;
  const auto dyn = j.contains("dynamics") ? detail::parse_enum(j["dynamics"], "dynamics", parse_dynamics)
                                          : (env == EnvKind::MiniGrid ? Dynamics::POMDP : Dynamics::MDP);
  const auto fw = j.contains("framework") ? detail::parse_enum(j["framework"], "framework", parse_critic_kind)
                                          : CriticKind::EQMARL;
  if (env == EnvKind::MiniGrid && dyn != Dynamics::POMDP) throw ConfigError("dynamics", "MiniGrid only has pomdp");
  ExperimentConfig c = default_config(env, dyn, fw);
  for (const auto& [k, v] : j.items()) {
    if (k == "env" || k == "dynamics" || k == "framework") continue;
    if (k == "name") c.name = get<std::string>(v, k);
    else if (k == "entanglement") c.entanglement = detail::parse_enum(v, k, parse_entanglement_style);
    else if (k == "num_agents") c.num_agents = get<int>(v, k);
    else if (k == "time_limit") c.time_limit = get<int>(v, k);
    else if (k == "epochs") c.epochs = get<int>(v, k);
    else if (k == "gamma") c.gamma = get<double>(v, k);
    else if (k == "alpha") c.alpha = get<double>(v, k);
    else if (k == "entropy") {
      const auto s = get<std::string>(v, k);
      if (s == "chosen-action") c.entropy = EntropyMode::ChosenAction;
      else if (s == "full-distribution") c.entropy = EntropyMode::FullDistribution;
      else throw ConfigError(k, "expected chosen-action or full-distribution");
    } else if (k == "huber_delta") c.huber_delta = get<double>(v, k);
    else if (k == "qubits") c.qubits = get<int>(v, k);
    else if (k == "layers") c.layers = get<int>(v, k);
    else if (k == "hidden") c.hidden = get<int>(v, k);
    else if (k == "beta") c.beta = get<double>(v, k);
    else if (k == "squash") {
      const auto s = get<std::string>(v, k);
      if (s == "arctan") c.squash = Squash::Arctan;
      else if (s == "identity") c.squash = Squash::Identity;
      else throw ConfigError(k, "expected arctan or identity");
    } else if (k == "sctde_head") {
      const auto s = get<std::string>(v, k);
      if (s == "linear") c.sctde_head = Activation::Linear;
      else if (s == "relu") c.sctde_head = Activation::ReLU;
      else throw ConfigError(k, "expected linear or relu");
    } else if (k == "lr") {
      if (!v.is_object()) throw ConfigError(k, "must be an object");
      for (const auto& [lk, lv] : v.items()) {
        const std::string key = "lr." + lk;
        if (lk == "critic") detail::read_rates(lv, key, "scale", c.critic_rates);
        else if (lk == "actor") detail::read_rates(lv, key, "action_weights", c.actor_rates);
        else if (lk == "classical_critic") c.classical_critic_rate = get<double>(lv, key);
        else if (lk == "classical_actor") c.classical_actor_rate = get<double>(lv, key);
        else throw ConfigError(key, "unknown key");
      }
    } else if (k == "seed") c.seed = get<std::uint64_t>(v, k);
    else if (k == "seeds") c.seeds = get<int>(v, k);
    else if (k == "output_dir") c.output_dir = get<std::string>(v, k);
    else if (k == "checkpoint_every") c.checkpoint_every = get<int>(v, k);
    else if (k == "workers") c.workers = get<int>(v, k);
    else throw ConfigError(k, "unknown key");
  }
  if (c.num_agents < 2) throw ConfigError("num_agents", "must be at least 2");
  if (c.env == EnvKind::CoinGame && c.num_agents != 2) throw ConfigError("num_agents", "CoinGame is a two-agent game");
  if (c.epochs < 0) throw ConfigError("epochs", "must be non-negative");
  if (c.qubits < 1) throw ConfigError("qubits", "must be positive");
  if (c.layers < 0) throw ConfigError("layers", "must be non-negative");
  if (c.hidden < 1) throw ConfigError("hidden", "must be positive");
  if (c.seeds < 1) throw ConfigError("seeds", "must be positive");
  if (c.time_limit < 0) throw ConfigError("time_limit", "must be non-negative");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma", "must lie in [0, 1]");
  if (is_quantum(c.framework) && c.num_agents * c.qubits > kMaxQubits) {
    throw ConfigError("qubits", "num_agents * qubits exceeds the simulator limit");
  }
  if (c.env == EnvKind::CoinGame && c.dynamics == Dynamics::MDP && is_quantum(c.framework) && c.qubits != 4) {
    throw ConfigError("qubits", "CoinGame MDP encoding maps 4 planes onto 4 qubits");
  }
  if (c.env == EnvKind::CartPole && c.dynamics == Dynamics::MDP && is_quantum(c.framework) && c.qubits != 4) {
    throw ConfigError("qubits", "CartPole MDP encoding tiles 4 features onto 4 qubits");
  }
  return c;
}

/// Parses `value` as JSON when possible, otherwise as a bare string.
inline nlohmann::json parse_override_value(const std::string& value) {
  try {
    return nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    return value;
  }
}

/// Applies `key=value` to `j`, creating nested objects along a dotted path.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "path crosses a non-object value");
    if (dot == std::string::npos) {
      (*node)[part] = parse_override_value(assignment.substr(eq + 1));
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON in ") + path + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  auto j = read_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of everything that shapes a run's numbers (seeds, output and worker settings excluded).
inline std::string config_hash(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("seed");
  j.erase("seeds");
  j.erase("output_dir");
  j.erase("workers");
  j.erase("name");
  j.erase("checkpoint_every");
  std::ostringstream os;
  os << std::hex << fnv1a(j.dump());
  return os.str();
}

}  // namespace eqmarl

#endif  // EQMARL_CONFIG_HPP
