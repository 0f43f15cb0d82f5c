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

#ifndef EQMARL_HARNESS_HPP
#define EQMARL_HARNESS_HPP

// Experiment orchestration behind the command-line tool: seeded training runs
// with a resumable manifest, parameter-count verification, plot-data export
// and greedy evaluation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "eqmarl/config.hpp"
#include "eqmarl/trainer.hpp"

namespace eqmarl {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Run manifest

enum class RunStatus { Pending, Complete };

struct RunRecord {
  std::uint64_t seed = 0;
  std::string csv;
  std::string checkpoint;
  RunStatus status = RunStatus::Pending;
};

struct RunManifest {
  std::string config_hash;
  nlohmann::json config;
  std::string output_dir;
  std::vector<RunRecord> runs;

  RunRecord* find(std::uint64_t seed) {
    for (auto& r : runs)
      if (r.seed == seed) return &r;
    return nullptr;
  }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : m.runs) {
    runs.push_back({{"seed", r.seed},
                    {"csv", r.csv},
                    {"checkpoint", r.checkpoint},
                    {"status", r.status == RunStatus::Complete ? "complete" : "pending"}});
  }
  return {{"config_hash", m.config_hash}, {"config", m.config}, {"output_dir", m.output_dir}, {"runs", runs}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.config = j.at("config");
  m.output_dir = j.at("output_dir").get<std::string>();
  for (const auto& r : j.at("runs")) {
    m.runs.push_back({r.at("seed").get<std::uint64_t>(), r.at("csv").get<std::string>(),
                      r.at("checkpoint").get<std::string>(),
                      r.at("status").get<std::string>() == "complete" ? RunStatus::Complete : RunStatus::Pending});
  }
  return m;
}

/// Writes via a temporary file and rename so readers never see partial JSON.
inline void write_json_atomically(const fs::path& path, const nlohmann::json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

/// Output root: EQMARL_OUT when set, otherwise the config's output_dir.
inline fs::path output_root(const ExperimentConfig& c) {
  if (const char* env = std::getenv("EQMARL_OUT"); env != nullptr && *env != '\0') return env;
  return c.output_dir;
}

/// Each distinct configuration gets its own directory, so reruns of one
/// config resume and different configs never overwrite each other.
inline fs::path run_directory(const ExperimentConfig& c) {
  return output_root(c) / (c.name + "-" + config_hash(c).substr(0, 8));
}

inline std::vector<std::uint64_t> seed_list(const ExperimentConfig& c) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < c.seeds; ++k) seeds.push_back(c.seed + static_cast<std::uint64_t>(k));
  return seeds;
}

/// Loads the manifest in `dir` or starts a new one, adding any missing seeds.
inline RunManifest open_manifest(const ExperimentConfig& c, const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  RunManifest m;
  if (fs::exists(path)) {
    m = manifest_from_json(read_json_file(path.string()));
    if (m.config_hash != config_hash(c)) {
      throw ConfigError("<manifest>", "existing manifest in " + dir.string() + " belongs to a different config");
    }
  } else {
    m.config_hash = config_hash(c);
    auto j = eqmarl::to_json(c);
    j.erase("seed");
    j.erase("seeds");
    m.config = j;
    m.output_dir = dir.string();
  }
  for (std::uint64_t s : seed_list(c)) {
    if (m.find(s) == nullptr) {
      m.runs.push_back({s, "seed_" + std::to_string(s) + ".csv", "seed_" + std::to_string(s) + ".ckpt.json",
                        RunStatus::Pending});
    }
  }
  return m;
}

/// Trains one seed, writing the per-epoch CSV and checkpoints into `dir`.
inline void run_single_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir, const RunRecord& rec,
                            const std::function<void(const EpochLog&)>& on_epoch = {}) {
  Trainer trainer(c, seed);
  const fs::path csv_path = dir / rec.csv;
  const fs::path partial = csv_path.string() + ".partial";
  std::ofstream csv(partial);
  if (!csv) throw std::runtime_error("cannot write " + partial.string());
  csv << kCsvHeader << "\n";
  for (int e = 0; e < c.epochs; ++e) {
    const EpochLog log = trainer.train_epoch();
    csv << csv_row(log) << "\n";
    if (on_epoch) on_epoch(log);
    if (c.checkpoint_every > 0 && (e + 1) % c.checkpoint_every == 0 && e + 1 < c.epochs) {
      write_json_atomically(dir / rec.checkpoint, trainer.checkpoint());
    }
  }
  csv.close();
  write_json_atomically(dir / rec.checkpoint, trainer.checkpoint());
  fs::rename(partial, csv_path);
}

struct TrainSummary {
  fs::path directory;
  int trained = 0;
  int skipped = 0;
};

/// Runs every pending seed of `c` on a bounded worker pool. Completed seeds
/// are skipped, which makes re-running an identical manifest a no-op.
inline TrainSummary train_all(const ExperimentConfig& c, std::ostream* progress = nullptr) {
  TrainSummary summary;
  summary.directory = run_directory(c);
  fs::create_directories(summary.directory);
  RunManifest manifest = open_manifest(c, summary.directory);
  const fs::path manifest_path = summary.directory / "manifest.json";
  write_json_atomically(manifest_path, to_json(manifest));

  const auto wanted_seeds = seed_list(c);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < manifest.runs.size(); ++i) {
    const auto& r = manifest.runs[i];
    const bool wanted = std::find(wanted_seeds.begin(), wanted_seeds.end(), r.seed) != wanted_seeds.end();
    if (!wanted) continue;
    if (r.status == RunStatus::Complete && fs::exists(summary.directory / r.csv)) {
      ++summary.skipped;
    } else {
      pending.push_back(i);
    }
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t pool = std::min<std::size_t>(pending.size(), c.workers > 0 ? c.workers : hw);
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      RunRecord rec;
      {
        std::lock_guard lock(mu);
        if (failure) return;
        rec = manifest.runs[pending[k]];
      }
      try {
        run_single_seed(c, rec.seed, summary.directory, rec);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
      std::lock_guard lock(mu);
      manifest.runs[pending[k]].status = RunStatus::Complete;
      write_json_atomically(manifest_path, to_json(manifest));
      ++summary.trained;
      if (progress) *progress << "seed " << rec.seed << " done -> " << (summary.directory / rec.csv).string() << "\n";
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < pool; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return summary;
}

// ---------------------------------------------------------------------------
// Parameter-count verification

struct CountExpectation {
  CriticKind framework;
  EnvKind env;
  Dynamics dynamics;
  std::optional<ParameterCount> critic;
  std::optional<int> actor;
};

/// Published trainable-parameter counts. Cells with no published figure are
/// left empty and reported without a check.
inline const std::vector<CountExpectation>& published_counts() {
  using C = CriticKind;
  using E = EnvKind;
  using D = Dynamics;
  static const std::vector<CountExpectation> table = {
      {C::EQMARL, E::CoinGame, D::MDP, ParameterCount{132, 1, 265}, 136},
      {C::EQMARL, E::CoinGame, D::POMDP, ParameterCount{408, 1, 817}, 412},
      {C::QFCTDE, E::CoinGame, D::MDP, ParameterCount{0, 265, 265}, 136},
      {C::QFCTDE, E::CoinGame, D::POMDP, ParameterCount{0, 817, 817}, 412},
      {C::FCTDE, E::CoinGame, D::MDP, ParameterCount{0, 889, 889}, 496},
      {C::FCTDE, E::CoinGame, D::POMDP, ParameterCount{0, 673, 673}, 388},
      {C::SCTDE, E::CoinGame, D::MDP, ParameterCount{444, 25, 913}, 496},
      {C::SCTDE, E::CoinGame, D::POMDP, ParameterCount{336, 25, 697}, 388},
      {C::EQMARL, E::MiniGrid, D::POMDP, ParameterCount{1848, 1, 3697}, std::nullopt},
      {C::QFCTDE, E::MiniGrid, D::POMDP, ParameterCount{0, 3697, 3697}, std::nullopt},
      {C::FCTDE, E::MiniGrid, D::POMDP, ParameterCount{0, 29601, 29601}, std::nullopt},
      {C::SCTDE, E::MiniGrid, D::POMDP, ParameterCount{14800, 201, 29801}, std::nullopt},
  };
  return table;
}

struct VerifyResult {
  ParameterCount critic;
  int actor = 0;
  std::optional<CountExpectation> expected;
  bool ok = true;
  std::string report;
};

inline VerifyResult verify_parameter_counts(CriticKind framework, EnvKind env, Dynamics dynamics,
                                           const std::vector<CountExpectation>& table = published_counts()) {
  const auto cfg = default_config(env, dynamics, framework);
  const auto environment = make_environment(env, dynamics, 0, cfg.num_agents, cfg.time_limit);
  VerifyResult r;
  r.critic = build_critic(cfg, *environment)->count();
  r.actor = build_actor(cfg, *environment)->parameter_count();
  for (const auto& e : table) {
    if (e.framework == framework && e.env == env && e.dynamics == dynamics) r.expected = e;
  }
  std::ostringstream out;
  auto cell = [](const ParameterCount& p) {
    return std::to_string(p.total) + " (" + std::to_string(p.per_agent) + " per agent, " + std::to_string(p.central) +
           " central)";
  };
  out << to_string(framework) << " " << to_string(env) << " " << to_string(dynamics) << "\n";
  out << "  critic: " << cell(r.critic);
  if (r.expected && r.expected->critic) {
    const bool match = *r.expected->critic == r.critic;
    r.ok = r.ok && match;
    out << (match ? "  [ok]" : "  [MISMATCH, expected " + cell(*r.expected->critic) + "]");
  } else {
    out << "  [no published figure]";
  }
  out << "\n  actor:  " << r.actor;
  if (r.expected && r.expected->actor) {
    const bool match = *r.expected->actor == r.actor;
    r.ok = r.ok && match;
    out << (match ? "  [ok]" : "  [MISMATCH, expected " + std::to_string(*r.expected->actor) + "]");
  } else {
    out << "  [no published figure]";
  }
  out << "\n";
  r.report = out.str();
  return r;
}

// ---------------------------------------------------------------------------
// Plot-data export

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) row.push_back(std::stod(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Trailing moving average; the first window-1 entries average what exists.
inline std::vector<double> trailing_average(const std::vector<double>& x, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be at least 1");
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i];
    if (i >= static_cast<std::size_t>(window)) sum -= x[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

struct AggregateRow {
  int epoch = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

/// Per-epoch statistics across runs of one metric column, truncated to the
/// shortest run.
inline std::vector<AggregateRow> aggregate_runs(const std::vector<CsvTable>& runs, const std::string& metric,
                                                int window = 1) {
  if (runs.empty()) throw std::invalid_argument("no completed runs to aggregate");
  std::vector<std::vector<double>> series;
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& t : runs) {
    const int col = t.column(metric);
    if (col < 0) throw std::invalid_argument("missing metric column '" + metric + "'");
    std::vector<double> s;
    for (const auto& row : t.rows) s.push_back(row.at(col));
    series.push_back(trailing_average(s, window));
    len = std::min(len, s.size());
  }
  std::vector<AggregateRow> out;
  for (std::size_t e = 0; e < len; ++e) {
    AggregateRow r;
    r.epoch = static_cast<int>(e);
    r.min = r.max = series[0][e];
    double sum = 0.0;
    for (const auto& s : series) {
      sum += s[e];
      r.min = std::min(r.min, s[e]);
      r.max = std::max(r.max, s[e]);
    }
    r.mean = sum / static_cast<double>(series.size());
    double sq = 0.0;
    for (const auto& s : series) sq += (s[e] - r.mean) * (s[e] - r.mean);
    r.std = std::sqrt(sq / static_cast<double>(series.size()));
    out.push_back(r);
  }
  return out;
}

/// Completed per-seed CSVs of a run directory: those listed as complete in
/// its manifest, or every seed_*.csv when there is no manifest.
inline std::vector<fs::path> completed_csvs(const fs::path& dir) {
  std::vector<fs::path> out;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    for (const auto& r : manifest_from_json(read_json_file(manifest.string())).runs)
      if (r.status == RunStatus::Complete) out.push_back(dir / r.csv);
  } else if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("seed_", 0) == 0 && entry.path().extension() == ".csv") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
  }
  return out;
}

inline void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "epoch,mean,std,min,max\n";
  for (const auto& r : rows) {
    out << r.epoch << "," << format_double(r.mean) << "," << format_double(r.std) << "," << format_double(r.min)
        << "," << format_double(r.max) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Greedy evaluation

struct EvalResult {
  std::vector<Metrics> episodes;
  std::vector<int> lengths;
};

/// Greedy rollouts with the parameters stored in a checkpoint.
inline EvalResult evaluate_checkpoint(const nlohmann::json& checkpoint, int episodes, std::uint64_t seed,
                                      std::ostream* trajectory = nullptr) {
  const ExperimentConfig cfg = config_from_json(checkpoint.at("config"));
  Trainer trainer(cfg, seed);
  trainer.load_checkpoint(checkpoint);
  EvalResult r;
  for (int k = 0; k < episodes; ++k) {
    trainer.env().reset();
    const Episode ep = rollout(trainer.env(), trainer.actor(), trainer.actor_contract(), trainer.critic_contract(),
                               trainer.rng(), trainer.env().time_limit(), true, trajectory);
    r.episodes.push_back(compute_metrics(ep.rewards, ep.coins, ep.own_coins));
    r.lengths.push_back(ep.length());
  }
  return r;
}

}  // namespace eqmarl

#endif  // EQMARL_HARNESS_HPP
