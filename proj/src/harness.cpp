#include "logbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "logbandit/agents.hpp"
#include "logbandit/confidence.hpp"
#include "logbandit/env.hpp"

namespace logbandit {

namespace {

using Json = nlohmann::json;

std::string fmt17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

bool known_algo(const std::string& algo, bool mnl) {
  if (mnl) return algo == "mnl_ucb_plus" || algo == "uniform";
  return algo == "ofulogplus" || algo == "eps_greedy" || algo == "radius_scaled" ||
         algo == "uniform";
}

ArmGenerator generator_for(const ExperimentConfig& config) {
  ArmGenerator generator;
  generator.kind = ArmGenerator::Kind::kUniformBall;
  generator.count = config.arms;
  return generator;
}

PolicyParams policy_for(const ExperimentConfig& config, std::uint64_t seed, double kappa) {
  PolicyParams params;
  params.S = config.S;
  params.delta = config.delta;
  params.solver = config.solver;
  params.radius_scale = config.algo == "radius_scaled" ? config.effective_radius_scale() : 1.0;
  params.eps = config.eps;
  params.seed = seed;
  params.c_gamma = config.c_gamma;
  if (config.is_mnl()) {
    params.kappa = kappa;
    params.R = config.R;
    params.rho = default_mnl_rho(config.K);
  }
  return params;
}

Json vec2(const Eigen::Vector2d& v) { return Json::array({v.x(), v.y()}); }

Eigen::Vector2d vec2(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  file << text;
  if (!file) throw std::runtime_error("failed writing " + path.string());
}

// The run loop shared by both models; `Env` is LogisticEnvSpec or MnlEnvSpec.
template <class Env>
RunRecord run_loop(const ExperimentConfig& config, const Env& env, const Vector& theta_flat,
                   Agent& agent, std::uint64_t seed, std::vector<Snapshot>* snapshots) {
  RunRecord record;
  record.seed = seed;
  record.rows.reserve(static_cast<std::size_t>(config.T));
  CounterRng reward_rng(seed, StreamPurpose::kRewards);
  double cumulative = 0.0;
  try {
    for (long t = 1; t <= config.T; ++t) {
      const std::vector<Vector> arms = arm_set(env.arms, config.d, seed, t);
      // Reporting only: the agent never sees theta_star.
      const ConfidenceSpec set = agent.confidence_set();
      RoundRow row;
      row.t = t;
      row.in_confidence_set = contains(set, theta_flat);
      if (snapshots != nullptr &&
          std::find(config.snapshot_rounds.begin(), config.snapshot_rounds.end(), t) !=
              config.snapshot_rounds.end()) {
        Snapshot snap;
        snap.round = static_cast<int>(t);
        snap.mle = set.center();
        snap.theta_star = theta_flat;
        snap.boundary = boundary_trace_2d(set, 256);
        snap.radius_sq = set.radius_sq();
        snapshots->push_back(std::move(snap));
      }

      const auto start = std::chrono::steady_clock::now();
      const std::size_t chosen = agent.choose(arms);
      row.arm = chosen;
      row.instant_regret = instant_regret(env, arms, chosen);
      reward_rng.seek(static_cast<std::uint64_t>(t));
      agent.update(arms[chosen], sample_reward(env, arms[chosen], reward_rng));
      if (config.timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      }
      cumulative += row.instant_regret;
      row.cum_regret = cumulative;
      row.mle_iters = agent.state().mle.iterations;
      record.rows.push_back(row);
    }
  } catch (const SolverError& error) {
    record.failed = true;
    record.error = error.what();
  }
  return record;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model != "logistic" && model != "mnl") {
    throw std::invalid_argument("config: model must be logistic or mnl, got '" + model + "'");
  }
  if (!known_algo(algo, is_mnl())) {
    throw std::invalid_argument("config: algorithm '" + algo + "' is not available for the " +
                                model + " model");
  }
  if (d < 1) throw std::invalid_argument("config: d must be positive");
  if (K < 1) throw std::invalid_argument("config: K must be positive");
  if (!is_mnl() && K != 1) throw std::invalid_argument("config: logistic model needs K = 1");
  if (!(S > 0.0)) throw std::invalid_argument("config: S must be positive");
  if (!(R > 0.0)) throw std::invalid_argument("config: R must be positive");
  if (is_mnl() && R < 1.0) {
    throw std::invalid_argument("config: the default rho has norm 1, so R must be >= 1");
  }
  if (T < 1) throw std::invalid_argument("config: T must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must lie in (0, 1)");
  if (arms < 1) throw std::invalid_argument("config: arms per round must be positive");
  if (seeds < 1) throw std::invalid_argument("config: seeds must be at least 1");
  if (!(c_gamma > 0.0)) throw std::invalid_argument("config: c_gamma must be positive");
  if (radius_scale && !(*radius_scale > 0.0)) {
    throw std::invalid_argument("config: radius scale must be positive");
  }
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("config: eps must lie in [0, 1]");
  if (kappa && !(*kappa > 0.0)) throw std::invalid_argument("config: kappa must be positive");
  if (workers < 1) throw std::invalid_argument("config: workers must be positive");
  for (int round : snapshot_rounds) {
    if (round < 1 || round > T) {
      throw std::invalid_argument("config: snapshot round " + std::to_string(round) +
                                  " outside 1.." + std::to_string(T));
    }
  }
  if (!snapshot_rounds.empty() && d * K != 2) {
    throw std::invalid_argument("config: snapshots need a two-dimensional parameter (d = 2, K = 1)");
  }
  solver.validate();
}

double ExperimentConfig::effective_radius_scale() const { return radius_scale.value_or(S); }

bool RunRecord::always_covered() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const RoundRow& row) { return row.in_confidence_set; });
}

Vector default_mnl_rho(int categories) {
  return Vector::Constant(categories, 1.0 / std::sqrt(static_cast<double>(categories)));
}

double mnl_kappa(const ExperimentConfig& config) {
  if (config.kappa) return *config.kappa;
  CounterRng rng(config.base_seed, StreamPurpose::kKappa);
  return 1.5 * estimate_kappa_mnl(config.d, config.K, config.S, 10000, rng);
}

RunRecord run_single(const ExperimentConfig& config, std::uint64_t seed,
                     std::vector<Snapshot>* snapshots) {
  config.validate();
  if (config.is_mnl()) {
    MnlEnvSpec env;
    env.theta_star = default_mnl_theta(config.d, config.K, config.S);
    env.S = config.S;
    env.rho = default_mnl_rho(config.K);
    env.R = config.R;
    env.arms = generator_for(config);
    env.horizon = config.T;
    env.seed = seed;
    env.validate();
    auto agent = make_agent(config.algo, config.d, config.K,
                            policy_for(config, seed, mnl_kappa(config)));
    return run_loop(config, env, flatten_param(env.theta_star), *agent, seed, snapshots);
  }
  LogisticEnvSpec env;
  // (S - 1)/sqrt(d) * ones, the benchmark instance; S/2 in norm for small S.
  const double norm = config.S > 2.0 ? config.S - 1.0 : 0.5 * config.S;
  env.theta_star = Vector::Constant(config.d, norm / std::sqrt(static_cast<double>(config.d)));
  env.S = config.S;
  env.arms = generator_for(config);
  env.horizon = config.T;
  env.seed = seed;
  env.validate();
  auto agent = make_agent(config.algo, config.d, 1, policy_for(config, seed, 0.0));
  return run_loop(config, env, env.theta_star, *agent, seed, snapshots);
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::vector<const RunRecord*> ok;
  for (const RunRecord& run : runs) {
    if (!run.failed) ok.push_back(&run);
  }
  std::vector<AggregateRow> rows;
  if (ok.empty()) return rows;
  std::size_t length = ok.front()->rows.size();
  for (const RunRecord* run : ok) length = std::min(length, run->rows.size());

  const double n = static_cast<double>(ok.size());
  std::vector<std::uint8_t> covered(ok.size(), 1);
  rows.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    double sum = 0.0;
    double covered_count = 0.0;
    for (std::size_t r = 0; r < ok.size(); ++r) {
      const RoundRow& row = ok[r]->rows[i];
      sum += row.cum_regret;
      covered[r] = covered[r] && row.in_confidence_set;
      covered_count += covered[r];
    }
    const double mean = sum / n;
    double squares = 0.0;
    for (const RunRecord* run : ok) {
      const double diff = run->rows[i].cum_regret - mean;
      squares += diff * diff;
    }
    AggregateRow row;
    row.t = ok.front()->rows[i].t;
    row.mean_cum_regret = mean;
    row.stderr_cum_regret = ok.size() > 1 ? std::sqrt(squares / (n - 1.0) / n) : 0.0;
    row.coverage_rate = covered_count / n;
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.runs.resize(static_cast<std::size_t>(config.seeds));
  if (config.is_mnl()) result.kappa_used = mnl_kappa(config);

  std::atomic<int> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&]() {
    for (int i = next++; i < config.seeds; i = next++) {
      try {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
        result.runs[static_cast<std::size_t>(i)] =
            run_single(config, seed, i == 0 ? &result.snapshots : nullptr);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.workers, config.seeds);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (const RunRecord& run : result.runs) result.failures += run.failed ? 1 : 0;
  result.aggregate = aggregate_runs(result.runs);
  return result;
}

std::string run_csv(const RunRecord& run) {
  std::ostringstream out;
  out << "seed,t,arm,instant_regret,cum_regret,in_confidence_set,mle_iters,wall_ms\n";
  for (const RoundRow& row : run.rows) {
    out << run.seed << ',' << row.t << ',' << row.arm << ',' << fmt17(row.instant_regret) << ','
        << fmt17(row.cum_regret) << ',' << (row.in_confidence_set ? 1 : 0) << ','
        << row.mle_iters << ',' << fmt17(row.wall_ms) << '\n';
  }
  return out.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "t,mean_cum_regret,stderr_cum_regret,coverage_rate\n";
  for (const AggregateRow& row : rows) {
    out << row.t << ',' << fmt17(row.mean_cum_regret) << ',' << fmt17(row.stderr_cum_regret)
        << ',' << fmt17(row.coverage_rate) << '\n';
  }
  return out.str();
}

std::string snapshot_json(const Snapshot& snapshot) {
  Json j;
  j["round"] = snapshot.round;
  j["mle"] = vec2(snapshot.mle);
  j["theta_star"] = vec2(snapshot.theta_star);
  Json boundary = Json::array();
  for (const auto& point : snapshot.boundary) boundary.push_back(vec2(point));
  j["boundary"] = std::move(boundary);
  j["radius_sq"] = snapshot.radius_sq;
  return j.dump(1) + "\n";
}

Snapshot parse_snapshot_json(const std::string& text) {
  const Json j = Json::parse(text);
  Snapshot snapshot;
  snapshot.round = j.at("round").get<int>();
  snapshot.mle = vec2(j.at("mle"));
  snapshot.theta_star = vec2(j.at("theta_star"));
  for (const Json& point : j.at("boundary")) snapshot.boundary.push_back(vec2(point));
  snapshot.radius_sq = j.at("radius_sq").get<double>();
  return snapshot;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  std::filesystem::create_directories(config.out);
  for (const RunRecord& run : result.runs) {
    write_text(config.out / ("run_" + std::to_string(run.seed) + ".csv"), run_csv(run));
  }
  write_text(config.out / "aggregate.csv", aggregate_csv(result.aggregate));
  for (const Snapshot& snapshot : result.snapshots) {
    write_text(config.out / ("snapshot_t" + std::to_string(snapshot.round) + ".json"),
               snapshot_json(snapshot));
  }

  Json summary;
  summary["model"] = config.model;
  summary["algo"] = config.algo;
  summary["d"] = config.d;
  summary["K"] = config.K;
  summary["S"] = config.S;
  summary["R"] = config.R;
  summary["T"] = config.T;
  summary["delta"] = config.delta;
  summary["arms"] = config.arms;
  summary["seeds"] = config.seeds;
  summary["base_seed"] = config.base_seed;
  if (config.algo == "radius_scaled") summary["radius_scale"] = config.effective_radius_scale();
  if (config.algo == "eps_greedy") summary["eps"] = config.eps;
  if (config.is_mnl()) {
    summary["c_gamma"] = config.c_gamma;
    summary["kappa"] = result.kappa_used;
    summary["kappa_source"] = config.kappa ? "config" : "1.5 x sampled estimate";
    summary["L"] = 0.5;
  }
  summary["arm_sets"] = "uniform in the unit ball, stream keyed by seed only (shared across algorithms)";
  Json runs = Json::array();
  for (const RunRecord& run : result.runs) {
    Json entry;
    entry["seed"] = run.seed;
    entry["rounds"] = run.rows.size();
    entry["final_regret"] = run.final_regret();
    entry["always_covered"] = run.always_covered();
    if (run.failed) entry["error"] = run.error;
    runs.push_back(std::move(entry));
  }
  summary["runs"] = std::move(runs);
  summary["failures"] = result.failures;
  if (!result.aggregate.empty()) {
    summary["mean_final_regret"] = result.aggregate.back().mean_cum_regret;
    summary["final_coverage_rate"] = result.aggregate.back().coverage_rate;
  }
  write_text(config.out / "summary.json", summary.dump(1) + "\n");
}

}  // namespace logbandit
