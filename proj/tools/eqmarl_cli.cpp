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

// Command-line front end. Exit codes: 0 success, 1 verification or runtime
// failure, 2 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqmarl/harness.hpp"
#include "eqmarl/oracle.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kConfigError = 2;

template <typename T, typename Parse>
T parse_flag(const std::string& value, const std::string& key, Parse parse) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw eqmarl::ConfigError(key, e.what());
  }
}

eqmarl::GateKind parse_gate(const std::string& s) {
  using eqmarl::GateKind;
  const std::pair<const char*, GateKind> names[] = {{"x", GateKind::X},   {"y", GateKind::Y},   {"z", GateKind::Z},
                                                   {"h", GateKind::H},   {"rx", GateKind::RX}, {"ry", GateKind::RY},
                                                   {"rz", GateKind::RZ}, {"cnot", GateKind::CNOT}, {"cz", GateKind::CZ}};
  for (const auto& [name, kind] : names)
    if (s == name) return kind;
  throw std::invalid_argument("unknown gate '" + s + "'");
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  int seeds = 0;
  long long seed = -1;
  int workers = 0;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  std::vector<std::string> overrides = a.overrides;
  if (a.seeds > 0) overrides.push_back("seeds=" + std::to_string(a.seeds));
  if (a.seed >= 0) overrides.push_back("seed=" + std::to_string(a.seed));
  if (a.workers > 0) overrides.push_back("workers=" + std::to_string(a.workers));
  const auto cfg = eqmarl::load_config(a.config, overrides);
  const auto summary = eqmarl::train_all(cfg, a.quiet ? nullptr : &std::cout);
  std::cout << "run directory: " << summary.directory.string() << "\n"
            << "trained " << summary.trained << ", skipped " << summary.skipped << " completed\n";
  return kOk;
}

struct VerifyArgs {
  std::string framework, env, dynamics;
  bool all = false;
};

int cmd_verify_params(const VerifyArgs& a) {
  using namespace eqmarl;
  std::vector<std::tuple<CriticKind, EnvKind, Dynamics>> cases;
  if (a.all) {
    for (const auto& e : published_counts()) cases.emplace_back(e.framework, e.env, e.dynamics);
  } else {
    if (a.framework.empty() || a.env.empty()) throw ConfigError("framework", "--framework and --env are required");
    const auto env = parse_flag<EnvKind>(a.env, "env", parse_env_kind);
    const std::string dyn_name = a.dynamics.empty() ? (env == EnvKind::MiniGrid ? "pomdp" : "mdp") : a.dynamics;
    cases.emplace_back(parse_flag<CriticKind>(a.framework, "framework", parse_critic_kind), env,
                       parse_flag<Dynamics>(dyn_name, "dynamics", parse_dynamics));
    if (env == EnvKind::MiniGrid && std::get<2>(cases.back()) != Dynamics::POMDP) {
      throw ConfigError("dynamics", "MiniGrid only has pomdp");
    }
  }
  bool ok = true;
  for (const auto& [fw, env, dyn] : cases) {
    const auto r = verify_parameter_counts(fw, env, dyn);
    std::cout << r.report;
    ok = ok && r.ok;
  }
  std::cout << (ok ? "parameter counts match" : "parameter count MISMATCH") << "\n";
  return ok ? kOk : kVerifyFailed;
}

struct ExportArgs {
  std::string run_dir, metric, out;
  int window = 1;
};

int cmd_export(const ExportArgs& a) {
  using namespace eqmarl;
  if (a.window < 1) throw ConfigError("window", "must be at least 1");
  const auto paths = completed_csvs(a.run_dir);
  if (paths.empty()) throw ConfigError("run-dir", "no completed runs in " + a.run_dir);
  std::vector<CsvTable> tables;
  for (const auto& p : paths) tables.push_back(read_csv(p));
  std::vector<AggregateRow> rows;
  try {
    rows = aggregate_runs(tables, a.metric, a.window);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("metric", e.what());
  }
  if (a.out.empty()) {
    write_aggregate(std::cout, rows);
  } else {
    std::ofstream out(a.out);
    if (!out) throw ConfigError("out", "cannot write " + a.out);
    write_aggregate(out, rows);
    std::cerr << "wrote " << rows.size() << " epochs from " << tables.size() << " runs to " << a.out << "\n";
  }
  return kOk;
}

struct OracleArgs {
  std::string suite = "all";
  std::string corrupt_gate;
  double corrupt_scale = 1.01;
};

int cmd_oracle(const OracleArgs& a) {
  using namespace eqmarl::reference;
  GateCorruption corrupt;
  if (!a.corrupt_gate.empty()) {
    corrupt.kind = parse_flag<eqmarl::GateKind>(a.corrupt_gate, "corrupt-gate", parse_gate);
    corrupt.scale = a.corrupt_scale;
  }
  std::vector<std::string> names;
  if (a.suite == "all") {
    names = suite_names();
  } else {
    const auto all = suite_names();
    if (std::find(all.begin(), all.end(), a.suite) == all.end()) {
      throw eqmarl::ConfigError("suite", "unknown suite '" + a.suite + "'");
    }
    names.push_back(a.suite);
  }
  bool ok = true;
  for (const auto& n : names) {
    const auto r = run_suite(n, corrupt);
    std::printf("%-16s %s  max_error=%.3e  tolerance=%.0e  cases=%d\n", r.name.c_str(), r.passed() ? "PASS" : "FAIL",
                r.max_error, r.tolerance, r.cases);
    ok = ok && r.passed();
  }
  return ok ? kOk : kVerifyFailed;
}

struct EvalArgs {
  std::string checkpoint, trajectory;
  int episodes = 1;
  unsigned long long seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  using namespace eqmarl;
  if (a.episodes < 1) throw ConfigError("episodes", "must be at least 1");
  const auto ck = read_json_file(a.checkpoint);
  if (!ck.contains("config") || !ck.contains("actor") || !ck.contains("critic")) {
    throw ConfigError("checkpoint", a.checkpoint + " is not a training checkpoint");
  }
  std::ofstream traj;
  if (!a.trajectory.empty()) {
    traj.open(a.trajectory);
    if (!traj) throw ConfigError("trajectory", "cannot write " + a.trajectory);
  }
  const auto r = evaluate_checkpoint(ck, a.episodes, a.seed, a.trajectory.empty() ? nullptr : &traj);
  Metrics mean;
  double len = 0.0;
  for (std::size_t k = 0; k < r.episodes.size(); ++k) {
    const auto& m = r.episodes[k];
    nlohmann::json row = {{"episode", k},          {"score", m.score},           {"total_coins", m.total_coins},
                          {"own_coin_rate", m.own_coin_rate}, {"avg_reward", m.avg_reward}, {"episode_len", r.lengths[k]}};
    std::cout << row.dump() << "\n";
    mean.score += m.score;
    mean.total_coins += m.total_coins;
    mean.own_coin_rate += m.own_coin_rate;
    mean.avg_reward += m.avg_reward;
    len += r.lengths[k];
  }
  const double n = static_cast<double>(r.episodes.size());
  nlohmann::json summary = {{"episodes", r.episodes.size()},      {"mean_score", mean.score / n},
                            {"mean_total_coins", mean.total_coins / n}, {"mean_own_coin_rate", mean.own_coin_rate / n},
                            {"mean_avg_reward", mean.avg_reward / n},   {"mean_episode_len", len / n}};
  std::cout << summary.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled quantum multi-agent actor-critic: training and verification tools"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train every seed of a config; completed seeds are skipped");
  train_cmd->add_option("--config", train.config, "JSON config file")->required();
  train_cmd->add_option("--override,-o", train.overrides, "Dotted key=value override (repeatable)");
  train_cmd->add_option("--seeds", train.seeds, "Number of seeds (overrides the config)");
  train_cmd->add_option("--seed", train.seed, "First seed (overrides the config)");
  train_cmd->add_option("--workers", train.workers, "Worker threads (default: hardware cores)");
  train_cmd->add_flag("--quiet", train.quiet, "Suppress per-seed progress lines");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify-params", "Compare trainable-parameter counts with published figures");
  verify_cmd->add_option("--framework", verify.framework, "eqmarl | qfctde | fctde | sctde");
  verify_cmd->add_option("--env", verify.env, "coingame | cartpole | minigrid");
  verify_cmd->add_option("--dynamics", verify.dynamics, "mdp | pomdp");
  verify_cmd->add_flag("--all", verify.all, "Check every published configuration");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export-plot-data", "Aggregate one metric across seeds per epoch");
  export_cmd->add_option("--run-dir", exp.run_dir, "Run directory holding seed CSVs")->required();
  export_cmd->add_option("--metric", exp.metric, "CSV column name")->required();
  export_cmd->add_option("--window", exp.window, "Trailing moving-average window (1 = none)");
  export_cmd->add_option("--out", exp.out, "Output CSV (default: stdout)");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Run brute-force reference suites");
  oracle_cmd->add_option("--suite", oracle.suite, "all | bell | unitary | gradient | split-quantum | split-classical");
  oracle_cmd->add_option("--corrupt-gate", oracle.corrupt_gate, "Negative control: distort this gate's reference matrix");
  oracle_cmd->add_option("--corrupt-scale", oracle.corrupt_scale, "Scale applied to the distorted matrix");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy-policy rollouts from a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint JSON")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "Number of episodes");
  eval_cmd->add_option("--seed", eval.seed, "Environment seed");
  eval_cmd->add_option("--trajectory", eval.trajectory, "Write per-step JSON lines to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*verify_cmd) return cmd_verify_params(verify);
    if (*export_cmd) return cmd_export(exp);
    if (*oracle_cmd) return cmd_oracle(oracle);
    if (*eval_cmd) return cmd_eval(eval);
  } catch (const eqmarl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
  return kOk;
}
