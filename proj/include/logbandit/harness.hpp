#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logbandit/optim.hpp"

namespace logbandit {

struct ExperimentConfig {
  std::string model = "logistic";  // logistic | mnl
  std::string algo = "ofulogplus";  // ofulogplus | mnl_ucb_plus | eps_greedy | radius_scaled | uniform
  int d = 2;
  int K = 1;
  double S = 5.0;
  double R = 1.0;
  int T = 4000;
  double delta = 0.05;
  int arms = 20;
  int seeds = 10;
  std::uint64_t base_seed = 0;
  double c_gamma = 1.0;
  std::optional<double> radius_scale;  // sigma_r; defaults to S for radius_scaled
  double eps = 0.1;
  std::optional<double> kappa;
  std::filesystem::path out = "out";
  std::vector<int> snapshot_rounds;
  int workers = 1;
  bool timing = false;  // fill wall_ms; off by default so outputs are byte-stable
  SolverConfig solver;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  bool is_mnl() const { return model == "mnl"; }
  double effective_radius_scale() const;
};

struct RoundRow {
  long t = 0;
  std::size_t arm = 0;
  double instant_regret = 0.0;
  double cum_regret = 0.0;
  bool in_confidence_set = false;
  int mle_iters = 0;
  double wall_ms = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<RoundRow> rows;
  bool failed = false;
  std::string error;

  double final_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
  /// True when theta_star was in the confidence set at every logged round.
  bool always_covered() const;
};

struct AggregateRow {
  long t = 0;
  double mean_cum_regret = 0.0;
  double stderr_cum_regret = 0.0;
  double coverage_rate = 0.0;  // share of seeds covered at every round up to t
};

struct Snapshot {
  int round = 0;
  Eigen::Vector2d mle;
  Eigen::Vector2d theta_star;
  std::vector<Eigen::Vector2d> boundary;
  double radius_sq = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // seed order
  std::vector<AggregateRow> aggregate;
  std::vector<Snapshot> snapshots;  // first seed only
  double kappa_used = 0.0;          // MNL only
  int failures = 0;
};

/// One seeded run. Seed i of an experiment is base_seed + i; arm sets and
/// rewards are drawn from streams keyed by that seed, so different algorithms
/// on the same seed see the same arms. Solver failures end the run and are
/// recorded, not thrown. Snapshots are taken for the requested rounds when
/// `snapshots` is non-null (d = 2 only).
RunRecord run_single(const ExperimentConfig& config, std::uint64_t seed,
                     std::vector<Snapshot>* snapshots = nullptr);

/// Runs every seed (in parallel up to config.workers) and aggregates over the
/// seeds that finished. Rows of the aggregate cover the rounds every
/// successful run reached.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Mean, standard error and coverage per round over the successful runs.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

/// Writes run_<seed>.csv per seed, aggregate.csv, snapshot_t<round>.json and
/// summary.json into config.out (created if missing).
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result);

/// CSV text in the fixed column order, numbers with 17 significant digits.
std::string run_csv(const RunRecord& run);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string snapshot_json(const Snapshot& snapshot);
Snapshot parse_snapshot_json(const std::string& text);

/// Default MNL instance pieces used when none is configured.
Vector default_mnl_rho(int categories);

/// MNL kappa handed to MNL-UCB+: the override if set, otherwise 1.5 times the
/// sampling estimate from the (base_seed, kappa) stream.
double mnl_kappa(const ExperimentConfig& config);

}  // namespace logbandit
