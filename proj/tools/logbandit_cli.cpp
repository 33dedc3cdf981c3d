// logbandit: run bandit experiments and the numerical lemma checks.
//
//   logbandit run --algo ofulogplus --S 5 --T 4000 --seeds 10 --out out/s5
//   logbandit verify --check all --trials 10000

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "logbandit/harness.hpp"
#include "logbandit/lemma_lab.hpp"

namespace {

using logbandit::CheckReport;
using logbandit::ExperimentConfig;

int run_command(const ExperimentConfig& config) {
  config.validate();
  const auto result = logbandit::run_experiment(config);
  logbandit::write_outputs(config, result);
  for (const auto& run : result.runs) {
    if (run.failed) {
      std::fprintf(stderr, "seed %llu failed after %zu rounds: %s\n",
                   static_cast<unsigned long long>(run.seed), run.rows.size(), run.error.c_str());
    }
  }
  if (!result.aggregate.empty()) {
    const auto& last = result.aggregate.back();
    std::printf("%s S=%g T=%d seeds=%d: mean regret %.4f (se %.4f), coverage %.3f\n",
                config.algo.c_str(), config.S, config.T, config.seeds, last.mean_cum_regret,
                last.stderr_cum_regret, last.coverage_rate);
  }
  std::printf("wrote %s\n", config.out.string().c_str());
  return result.failures > 0 ? 1 : 0;
}

int verify_command(const std::string& check, long trials, std::uint64_t seed,
                   const std::string& out, int workers) {
  std::vector<std::string> names;
  if (check == "all") {
    names = logbandit::check_names();
  } else {
    names.push_back(check);
    logbandit::run_named_check(check, 1, seed);  // rejects unknown names up front
  }

  std::vector<std::vector<CheckReport>> results(names.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < names.size(); i = next++) {
      results[i] = logbandit::run_named_check(names[i], trials, seed);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < std::min<int>(workers, static_cast<int>(names.size())); ++i) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& thread : pool) thread.join();

  nlohmann::json report = nlohmann::json::array();
  bool all_pass = true;
  for (const auto& group : results) {
    for (const CheckReport& r : group) {
      all_pass = all_pass && r.pass;
      std::printf("%s %-28s trials=%-7ld max_violation=%-12.4g tolerance=%.4g\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.trials, r.max_violation,
                  r.tolerance);
      report.push_back({{"name", r.name},
                        {"trials", r.trials},
                        {"max_violation", r.max_violation},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass},
                        {"worst_instance", r.worst_instance},
                        {"note", r.note}});
    }
  }
  if (!out.empty()) {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    file << report.dump(1) << '\n';
    if (!file) {
      std::fprintf(stderr, "cannot write %s\n", out.c_str());
      return 2;
    }
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logistic and MNL bandit experiments"};
  app.require_subcommand(1);

  ExperimentConfig config;
  std::string out_dir = config.out.string();
  double radius_scale = 0.0;
  double kappa = 0.0;
  auto* run = app.add_subcommand("run", "run a seeded experiment and write CSV/JSON outputs");
  run->set_config("--config", "", "key=value file; command-line flags override it");
  run->add_option("--model", config.model, "logistic | mnl")->capture_default_str();
  run->add_option("--algo", config.algo,
                  "ofulogplus | radius_scaled | eps_greedy | uniform | mnl_ucb_plus")
      ->capture_default_str();
  run->add_option("--d", config.d)->capture_default_str();
  run->add_option("--K", config.K)->capture_default_str();
  run->add_option("--S", config.S)->capture_default_str();
  run->add_option("--R", config.R)->capture_default_str();
  run->add_option("--T", config.T)->capture_default_str();
  run->add_option("--delta", config.delta)->capture_default_str();
  run->add_option("--arms", config.arms, "arms per round")->capture_default_str();
  run->add_option("--seeds", config.seeds)->capture_default_str();
  run->add_option("--base-seed", config.base_seed)->capture_default_str();
  run->add_option("--c-gamma", config.c_gamma)->capture_default_str();
  auto* scale_opt = run->add_option("--radius-scale", radius_scale, "sigma_r (default S)");
  run->add_option("--eps", config.eps)->capture_default_str();
  auto* kappa_opt = run->add_option("--kappa", kappa, "MNL kappa (default 1.5 x estimate)");
  run->add_option("--out", out_dir)->capture_default_str();
  run->add_option("--snapshot-rounds", config.snapshot_rounds)->delimiter(',');
  run->add_option("--workers", config.workers)->capture_default_str();
  run->add_flag("--timing", config.timing, "record wall_ms (outputs stop being byte-stable)");

  std::string check = "all";
  long trials = 10000;
  std::uint64_t seed = 0;
  std::string report_path = "verify_report.json";
  int verify_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* verify = app.add_subcommand("verify", "run the numerical lemma checks");
  verify->add_option("--check", check, "check name or all")->capture_default_str();
  verify->add_option("--trials", trials)->capture_default_str();
  verify->add_option("--seed", seed)->capture_default_str();
  verify->add_option("--out", report_path, "JSON report (empty to skip)")->capture_default_str();
  verify->add_option("--workers", verify_workers)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      config.out = out_dir;
      if (*scale_opt) config.radius_scale = radius_scale;
      if (*kappa_opt) config.kappa = kappa;
      return run_command(config);
    }
    return verify_command(check, trials, seed, report_path, verify_workers);
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 2;
  }
}
