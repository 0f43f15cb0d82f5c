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

#ifndef EQMARL_ENVS_HPP
#define EQMARL_ENVS_HPP

// Multi-agent environments:
//   CoinGame  two agents (red, blue) on a 3x3 grid collecting coloured coins.
//   CartPole  independent cart-pole instances, one per agent.
//   MiniGrid  independent 5x5 walled mazes, one per agent, egocentric view.
// plus the observation transforms that turn raw observations into model inputs.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "eqmarl/branch.hpp"
#include "eqmarl/nn.hpp"
#include "eqmarl/vqc.hpp"

namespace eqmarl {

enum class EnvKind { CoinGame, CartPole, MiniGrid };
enum class Dynamics { MDP, POMDP };

inline std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::CoinGame: return "coingame";
    case EnvKind::CartPole: return "cartpole";
    case EnvKind::MiniGrid: return "minigrid";
  }
  return "coingame";
}

inline EnvKind parse_env_kind(std::string_view s) {
  for (auto k : {EnvKind::CoinGame, EnvKind::CartPole, EnvKind::MiniGrid}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown environment '" + std::string(s) + "'");
}

inline std::string to_string(Dynamics d) { return d == Dynamics::MDP ? "mdp" : "pomdp"; }

inline Dynamics parse_dynamics(std::string_view s) {
  if (s == "mdp") return Dynamics::MDP;
  if (s == "pomdp") return Dynamics::POMDP;
  throw std::invalid_argument("unknown dynamics '" + std::string(s) + "'");
}

struct StepResult {
  std::vector<double> rewards;
  bool done = false;
  /// CoinGame only: coins collected this step per agent, and how many were own-colour.
  std::vector<int> coins;
  std::vector<int> own_coins;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual EnvKind kind() const = 0;
  virtual Dynamics dynamics() const = 0;
  virtual int num_agents() const = 0;
  virtual int num_actions() const = 0;
  virtual int time_limit() const = 0;
  virtual int t() const = 0;
  virtual void reset() = 0;
  virtual StepResult step(std::span<const int> actions) = 0;
  /// Flattened raw observation of `agent`.
  virtual std::vector<double> observe(int agent) const = 0;
  virtual std::vector<int> observation_shape() const = 0;
  virtual bool agent_done(int) const { return false; }
  virtual nlohmann::json snapshot() const = 0;

  int observation_size() const {
    int n = 1;
    for (int d : observation_shape()) n *= d;
    return n;
  }

 protected:
  void check_actions(std::span<const int> actions) const {
    if (static_cast<int>(actions.size()) != num_agents()) {
      throw std::invalid_argument("expected " + std::to_string(num_agents()) + " actions, got " +
                                  std::to_string(actions.size()));
    }
    for (int a : actions) {
      if (a < 0 || a >= num_actions()) throw std::invalid_argument("invalid action id " + std::to_string(a));
    }
  }
};

// ---------------------------------------------------------------------------
// CoinGame

class CoinGame : public Environment {
 public:
  static constexpr int kSize = 3;
  static constexpr int kAgents = 2;
  enum Action { North = 0, South = 1, East = 2, West = 3 };
  enum Color { Red = 0, Blue = 1 };

  struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
  };

  CoinGame(Dynamics dynamics, std::uint64_t seed, int time_limit = 50)
      : dynamics_(dynamics), time_limit_(time_limit), rng_(seed) {
    reset();
  }

  EnvKind kind() const override { return EnvKind::CoinGame; }
  Dynamics dynamics() const override { return dynamics_; }
  int num_agents() const override { return kAgents; }
  int num_actions() const override { return 4; }
  int time_limit() const override { return time_limit_; }
  int t() const override { return t_; }

  const Cell& agent(int n) const { return agents_.at(n); }
  const Cell& coin() const { return coin_; }
  int coin_color() const { return coin_color_; }
  /// Agent n's colour; agent 0 is red, agent 1 blue.
  static int color_of(int n) { return n; }

  /// Places agents and coin explicitly (tests and debugging).
  void set_state(Cell a0, Cell a1, Cell coin, int coin_color, int t = 0) {
    for (const auto& c : {a0, a1, coin}) {
      if (c.row < 0 || c.row >= kSize || c.col < 0 || c.col >= kSize) throw std::out_of_range("cell off grid");
    }
    agents_ = {a0, a1};
    coin_ = coin;
    coin_color_ = coin_color;
    t_ = t;
  }

  void reset() override {
    t_ = 0;
    for (auto& a : agents_) a = random_cell();
    coin_color_ = static_cast<int>(uniform_index(rng_, 2));
    respawn_coin();
  }

  StepResult step(std::span<const int> actions) override {
    check_actions(actions);
    if (t_ >= time_limit_) throw std::logic_error("step after episode end");
    StepResult r;
    r.rewards.assign(kAgents, 0.0);
    r.coins.assign(kAgents, 0);
    r.own_coins.assign(kAgents, 0);
    for (int n = 0; n < kAgents; ++n) agents_[n] = moved(agents_[n], actions[n]);
    bool collected = false;
    for (int n = 0; n < kAgents; ++n) {
      if (agents_[n] == coin_) {
        collected = true;
        r.coins[n] = 1;
        if (coin_color_ == color_of(n)) {
          r.own_coins[n] = 1;
          r.rewards[n] = 1.0;
        } else {
          r.rewards[n] = -2.0;
        }
      }
    }
    if (collected) {
      coin_color_ = 1 - coin_color_;
      respawn_coin();
    }
    ++t_;
    r.done = t_ >= time_limit_;
    return r;
  }

  /// Planes (self, other agent, own-colour coin, other coin) x rows x cols;
  /// the POMDP variant omits the other-agent plane.
  std::vector<double> observe(int n) const override {
    if (n < 0 || n >= kAgents) throw std::out_of_range("agent index");
    const int planes = dynamics_ == Dynamics::MDP ? 4 : 3;
    std::vector<double> o(static_cast<std::size_t>(planes * kSize * kSize), 0.0);
    auto set = [&](int plane, const Cell& c) { o[(plane * kSize + c.row) * kSize + c.col] = 1.0; };
    int p = 0;
    set(p++, agents_[n]);
    if (dynamics_ == Dynamics::MDP) set(p++, agents_[1 - n]);
    set(coin_color_ == color_of(n) ? p : p + 1, coin_);
    return o;
  }

  std::vector<int> observation_shape() const override {
    return {dynamics_ == Dynamics::MDP ? 4 : 3, kSize, kSize};
  }

  nlohmann::json snapshot() const override {
    return {{"t", t_},
            {"agents", {{agents_[0].row, agents_[0].col}, {agents_[1].row, agents_[1].col}}},
            {"coin", {coin_.row, coin_.col}},
            {"coin_color", coin_color_ == Red ? "red" : "blue"}};
  }

 private:
  Cell random_cell() {
    const int k = static_cast<int>(uniform_index(rng_, kSize * kSize));
    return {k / kSize, k % kSize};
  }

  void respawn_coin() {
    std::vector<Cell> free;
    for (int r = 0; r < kSize; ++r)
      for (int c = 0; c < kSize; ++c) {
        Cell cell{r, c};
        if (!(cell == agents_[0]) && !(cell == agents_[1])) free.push_back(cell);
      }
    coin_ = free[uniform_index(rng_, free.size())];
  }

  static Cell moved(Cell c, int action) {
    switch (action) {
      case North: c.row = std::max(c.row - 1, 0); break;
      case South: c.row = std::min(c.row + 1, kSize - 1); break;
      case East: c.col = std::min(c.col + 1, kSize - 1); break;
      case West: c.col = std::max(c.col - 1, 0); break;
    }
    return c;
  }

  Dynamics dynamics_;
  int time_limit_;
  Rng rng_;
  int t_ = 0;
  std::array<Cell, kAgents> agents_{};
  Cell coin_{};
  int coin_color_ = Red;
};

// ---------------------------------------------------------------------------
// CartPole

class CartPole : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kAngleLimit = 0.2095;
  static constexpr double kPositionLimit = 2.4;
  enum Action { Left = 0, Right = 1 };

  struct Pole {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
    bool alive = true;
  };

  CartPole(Dynamics dynamics, std::uint64_t seed, int num_agents = 2, int time_limit = 500)
      : dynamics_(dynamics), time_limit_(time_limit), rng_(seed), poles_(static_cast<std::size_t>(num_agents)) {
    if (num_agents < 1) throw std::invalid_argument("cartpole needs at least one agent");
    reset();
  }

  EnvKind kind() const override { return EnvKind::CartPole; }
  Dynamics dynamics() const override { return dynamics_; }
  int num_agents() const override { return static_cast<int>(poles_.size()); }
  int num_actions() const override { return 2; }
  int time_limit() const override { return time_limit_; }
  int t() const override { return t_; }
  bool agent_done(int n) const override { return !poles_.at(n).alive; }
  const Pole& pole(int n) const { return poles_.at(n); }
  Pole& pole(int n) { return poles_.at(n); }

  static bool balanced(const Pole& p) {
    return std::abs(p.theta) <= kAngleLimit && std::abs(p.x) <= kPositionLimit;
  }

  void reset() override {
    t_ = 0;
    for (auto& p : poles_) {
      p.x = uniform(rng_, -0.05, 0.05);
      p.x_dot = uniform(rng_, -0.05, 0.05);
      p.theta = uniform(rng_, -0.05, 0.05);
      p.theta_dot = uniform(rng_, -0.05, 0.05);
      p.alive = true;
    }
  }

  /// Euler step of one pole under the push `action`.
  static void integrate(Pole& p, int action) {
    const double total_mass = kCartMass + kPoleMass;
    const double pole_moment = kPoleMass * kHalfLength;
    const double force = action == Right ? kForce : -kForce;
    const double cos_t = std::cos(p.theta);
    const double sin_t = std::sin(p.theta);
    const double temp = (force + pole_moment * p.theta_dot * p.theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (kGravity * sin_t - cos_t * temp) / (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
    const double x_acc = temp - pole_moment * theta_acc * cos_t / total_mass;
    p.x += kDt * p.x_dot;
    p.x_dot += kDt * x_acc;
    p.theta += kDt * p.theta_dot;
    p.theta_dot += kDt * theta_acc;
  }

  StepResult step(std::span<const int> actions) override {
    check_actions(actions);
    if (t_ >= time_limit_) throw std::logic_error("step after episode end");
    StepResult r;
    r.rewards.assign(poles_.size(), 0.0);
    bool any_alive = false;
    for (std::size_t n = 0; n < poles_.size(); ++n) {
      auto& p = poles_[n];
      if (!p.alive) continue;
      integrate(p, actions[n]);
      if (balanced(p)) {
        r.rewards[n] = 1.0;
        any_alive = true;
      } else {
        p.alive = false;
      }
    }
    ++t_;
    r.done = !any_alive || t_ >= time_limit_;
    return r;
  }

  /// (x, x_dot, theta, theta_dot); the POMDP variant omits x_dot.
  std::vector<double> observe(int n) const override {
    const auto& p = poles_.at(n);
    if (dynamics_ == Dynamics::MDP) return {p.x, p.x_dot, p.theta, p.theta_dot};
    return {p.x, p.theta, p.theta_dot};
  }

  std::vector<int> observation_shape() const override { return {dynamics_ == Dynamics::MDP ? 4 : 3, 1}; }

  nlohmann::json snapshot() const override {
    nlohmann::json poles = nlohmann::json::array();
    for (const auto& p : poles_) {
      poles.push_back({{"x", p.x}, {"x_dot", p.x_dot}, {"theta", p.theta}, {"theta_dot", p.theta_dot}, {"alive", p.alive}});
    }
    return {{"t", t_}, {"poles", poles}};
  }

 private:
  Dynamics dynamics_;
  int time_limit_;
  Rng rng_;
  int t_ = 0;
  std::vector<Pole> poles_;
};

// ---------------------------------------------------------------------------
// MiniGrid

class MiniGrid : public Environment {
 public:
  static constexpr int kSize = 5;
  static constexpr int kView = 7;
  enum Action { TurnLeft = 0, TurnRight = 1, Forward = 2 };
  /// Facing directions, clockwise from east.
  enum Direction { Right = 0, Down = 1, Left = 2, Up = 3 };
  // (object, colour, state) encodings.
  static constexpr int kEmpty = 1;
  static constexpr int kWall = 2;
  static constexpr int kGoal = 8;
  static constexpr int kGreen = 1;
  static constexpr int kGrey = 5;

  struct Agent {
    int x = 1;
    int y = 1;
    int dir = Right;
    bool done = false;
  };

  MiniGrid(std::uint64_t seed, int num_agents = 2, int time_limit = 50)
      : time_limit_(time_limit), agents_(static_cast<std::size_t>(num_agents)), counts_(static_cast<std::size_t>(num_agents)) {
    (void)seed;  // the layout is fixed; kept for a uniform constructor signature
    if (num_agents < 1) throw std::invalid_argument("minigrid needs at least one agent");
    reset();
  }

  EnvKind kind() const override { return EnvKind::MiniGrid; }
  Dynamics dynamics() const override { return Dynamics::POMDP; }
  int num_agents() const override { return static_cast<int>(agents_.size()); }
  int num_actions() const override { return 3; }
  int time_limit() const override { return time_limit_; }
  int t() const override { return t_; }
  bool agent_done(int n) const override { return agents_.at(n).done; }
  const Agent& agent(int n) const { return agents_.at(n); }
  Agent& agent(int n) { return agents_.at(n); }
  static constexpr int goal_x() { return kSize - 2; }
  static constexpr int goal_y() { return kSize - 2; }

  static bool is_wall(int x, int y) { return x <= 0 || y <= 0 || x >= kSize - 1 || y >= kSize - 1; }

  /// Visit count of (position, direction, action) for agent n.
  int visit_count(int n, int x, int y, int dir, int action) const {
    const auto& m = counts_.at(n);
    auto it = m.find({x, y, dir, action});
    return it == m.end() ? 0 : it->second;
  }

  /// Starts a new episode. Exploration counts persist across episodes.
  void reset() override {
    t_ = 0;
    for (auto& a : agents_) a = Agent{};
  }

  void set_time(int t) { t_ = t; }

  StepResult step(std::span<const int> actions) override {
    check_actions(actions);
    if (t_ >= time_limit_) throw std::logic_error("step after episode end");
    StepResult r;
    r.rewards.assign(agents_.size(), 0.0);
    bool all_done = true;
    for (std::size_t n = 0; n < agents_.size(); ++n) {
      auto& a = agents_[n];
      if (a.done) continue;
      const int px = a.x, py = a.y;
      const int act = actions[n];
      if (act == TurnLeft) a.dir = (a.dir + 3) % 4;
      if (act == TurnRight) a.dir = (a.dir + 1) % 4;
      if (act == Forward) {
        const int nx = a.x + kDx[a.dir], ny = a.y + kDy[a.dir];
        if (!is_wall(nx, ny)) {
          a.x = nx;
          a.y = ny;
        }
      }
      const int c = ++counts_[n][{a.x, a.y, a.dir, act}];
      double base;
      if (a.x == px && a.y == py) {
        base = -2.0;
      } else if (a.x == goal_x() && a.y == goal_y()) {
        base = 100.0 * (1.0 - 0.9 * (t_ + 1) / static_cast<double>(time_limit_));
        a.done = true;
      } else {
        base = -1.0;
      }
      r.rewards[n] = 1.0 / std::sqrt(static_cast<double>(c)) + base;
      all_done = all_done && a.done;
    }
    ++t_;
    r.done = all_done || t_ >= time_limit_;
    return r;
  }

  /// 7 x 7 x 3 egocentric view; the agent sits at column 3 of the last row
  /// looking toward row 0. Cells outside the grid read as walls.
  std::vector<double> observe(int n) const override {
    const auto& a = agents_.at(n);
    std::vector<double> o(static_cast<std::size_t>(kView * kView * 3), 0.0);
    const int fx = kDx[a.dir], fy = kDy[a.dir];
    const int rx = kDx[(a.dir + 1) % 4], ry = kDy[(a.dir + 1) % 4];
    for (int i = 0; i < kView; ++i) {
      for (int j = 0; j < kView; ++j) {
        const int ahead = kView - 1 - j, side = i - kView / 2;
        const int x = a.x + fx * ahead + rx * side;
        const int y = a.y + fy * ahead + ry * side;
        double* cell = &o[(i * kView + j) * 3];
        if (is_wall(x, y)) {
          cell[0] = kWall;
          cell[1] = kGrey;
        } else if (x == goal_x() && y == goal_y()) {
          cell[0] = kGoal;
          cell[1] = kGreen;
        } else {
          cell[0] = kEmpty;
        }
      }
    }
    return o;
  }

  std::vector<int> observation_shape() const override { return {kView, kView, 3}; }

  nlohmann::json snapshot() const override {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : agents_) agents.push_back({{"x", a.x}, {"y", a.y}, {"dir", a.dir}, {"done", a.done}});
    return {{"t", t_}, {"agents", agents}};
  }

 private:
  static constexpr int kDx[4] = {1, 0, -1, 0};
  static constexpr int kDy[4] = {0, 1, 0, -1};

  int time_limit_;
  int t_ = 0;
  std::vector<Agent> agents_;
  std::vector<std::map<std::tuple<int, int, int, int>, int>> counts_;
};

// ---------------------------------------------------------------------------
// Observation transforms

/// Sums each row of each plane with weights 2^-k over the column index k:
/// P x R x C binary planes -> P x R matrix.
inline ObservationMatrix coingame_fmdp(std::span<const double> raw, int planes, int rows = 3, int cols = 3) {
  if (static_cast<int>(raw.size()) != planes * rows * cols) throw std::invalid_argument("f_MDP input shape mismatch");
  if (rows != 3) throw std::invalid_argument("f_MDP output must have 3 columns");
  auto m = ObservationMatrix::zeros(planes);
  for (int p = 0; p < planes; ++p)
    for (int r = 0; r < rows; ++r) {
      double s = 0.0;
      for (int k = 0; k < cols; ++k) s += raw[(p * rows + r) * cols + k] * std::ldexp(1.0, -k);
      m.at(p, r) = s;
    }
  return m;
}

inline constexpr std::array<double, 4> kCartPoleScale = {2.4, 2.5, 0.21, 2.5};

/// Divides each feature by its normaliser; the POMDP variant skips the velocity entry.
inline std::vector<double> cartpole_scale(std::span<const double> raw, Dynamics dynamics) {
  const std::vector<double> v = dynamics == Dynamics::MDP
                                    ? std::vector<double>(kCartPoleScale.begin(), kCartPoleScale.end())
                                    : std::vector<double>{kCartPoleScale[0], kCartPoleScale[2], kCartPoleScale[3]};
  if (raw.size() != v.size()) throw std::invalid_argument("cartpole observation shape mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / v[i];
  return out;
}

/// Repeats feature d across the three rotation axes of qubit d.
inline ObservationMatrix tile_features(std::span<const double> features) {
  auto m = ObservationMatrix::zeros(static_cast<int>(features.size()));
  for (std::size_t d = 0; d < features.size(); ++d)
    for (int i = 0; i < 3; ++i) m.at(static_cast<int>(d), i) = features[d];
  return m;
}

/// Model input for one agent. Quantum models get the fixed MDP transforms
/// (or scaled features for their encoder); classical models get the raw vector.
inline AgentObservation transform_observation(EnvKind env, Dynamics dynamics, std::span<const double> raw,
                                              bool quantum, int qubits) {
  AgentObservation out;
  out.raw.assign(raw.begin(), raw.end());
  if (!quantum) return out;
  switch (env) {
    case EnvKind::CoinGame:
      if (dynamics == Dynamics::MDP) {
        const int planes = static_cast<int>(raw.size()) / 9;
        if (planes != qubits) throw std::invalid_argument("CoinGame MDP encoding needs D equal to the plane count");
        out.matrix = coingame_fmdp(raw, planes);
      }
      break;
    case EnvKind::CartPole:
      out.raw = cartpole_scale(raw, dynamics);
      if (dynamics == Dynamics::MDP) {
        if (qubits != 4) throw std::invalid_argument("CartPole MDP encoding needs D = 4");
        out.matrix = tile_features(out.raw);
      }
      break;
    case EnvKind::MiniGrid: break;
  }
  return out;
}

/// True when the quantum models of this environment read through a trainable encoder.
inline bool uses_encoder(EnvKind env, Dynamics dynamics) {
  return env == EnvKind::MiniGrid || dynamics == Dynamics::POMDP;
}

inline std::unique_ptr<Environment> make_environment(EnvKind env, Dynamics dynamics, std::uint64_t seed,
                                                     int num_agents = 2, int time_limit = 0) {
  switch (env) {
    case EnvKind::CoinGame:
      if (num_agents != 2) throw std::invalid_argument("CoinGame is a two-agent game");
      return std::make_unique<CoinGame>(dynamics, seed, time_limit > 0 ? time_limit : 50);
    case EnvKind::CartPole:
      return std::make_unique<CartPole>(dynamics, seed, num_agents, time_limit > 0 ? time_limit : 500);
    case EnvKind::MiniGrid:
      if (dynamics != Dynamics::POMDP) throw std::invalid_argument("MiniGrid only has POMDP dynamics");
      return std::make_unique<MiniGrid>(seed, num_agents, time_limit > 0 ? time_limit : 50);
  }
  throw std::invalid_argument("unknown environment");
}

/// Appends one JSON line describing a step to a trajectory dump.
inline void write_trajectory_line(std::ostream& out, const Environment& env, std::span<const int> actions,
                                  const StepResult& r) {
  nlohmann::json line = {{"state", env.snapshot()},
                         {"actions", std::vector<int>(actions.begin(), actions.end())},
                         {"rewards", r.rewards},
                         {"done", r.done}};
  out << line.dump() << '\n';
}

}  // namespace eqmarl

#endif  // EQMARL_ENVS_HPP
