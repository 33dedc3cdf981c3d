// Acceptance checks: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 4 6        run a subset
//
// Criteria 2 and 3 share the T = 4000 runs.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "logbandit/confidence.hpp"
#include "logbandit/env.hpp"
#include "logbandit/glm.hpp"
#include "logbandit/harness.hpp"
#include "logbandit/history.hpp"
#include "logbandit/lemma_lab.hpp"
#include "logbandit/optim.hpp"

using namespace logbandit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(const char* format, double a) {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, format, a);
  return buffer;
}

double mean_at(const ExperimentResult& result, long t) {
  return result.aggregate.at(static_cast<std::size_t>(t - 1)).mean_cum_regret;
}

// Runs of the T = 4000 experiment, keyed by (algo, S).
std::map<std::pair<std::string, double>, ExperimentResult> experiment_cache;

const ExperimentResult& experiment(const std::string& algo, double S) {
  const auto key = std::make_pair(algo, S);
  auto found = experiment_cache.find(key);
  if (found != experiment_cache.end()) return found->second;
  ExperimentConfig config;
  config.algo = algo;
  config.S = S;
  config.T = 4000;
  config.seeds = 10;
  config.workers = workers();
  if (S == 5.0 && algo != "eps_greedy") config.snapshot_rounds = {4000};
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result = run_experiment(config);
  std::fprintf(stderr, "  [%s S=%g: %.0f s, %d failed seeds]\n", algo.c_str(), S,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
               result.failures);
  return experiment_cache.emplace(key, std::move(result)).first->second;
}

Outcome coverage() {
  ExperimentConfig config;
  config.algo = "uniform";
  config.T = 500;
  config.seeds = 200;
  config.workers = workers();
  const ExperimentResult result = run_experiment(config);
  int violated = 0;
  for (const RunRecord& run : result.runs) violated += run.always_covered() ? 0 : 1;
  const double rate = violated / 200.0;
  return {result.failures == 0 && rate <= 0.05 + 0.047,
          std::to_string(violated) + "/200 runs with a violation, rate " + fmt("%.3f", rate) +
              " (bound 0.097)"};
}

Outcome regret_curves() {
  bool pass = true;
  std::ostringstream detail;
  for (double S : {5.0, 10.0}) {
    const auto& ofu = experiment("ofulogplus", S);
    const auto& scaled = experiment("radius_scaled", S);
    const auto& greedy = experiment("eps_greedy", S);
    const bool complete = ofu.failures == 0 && scaled.failures == 0 && greedy.failures == 0 &&
                          ofu.aggregate.size() == 4000 && scaled.aggregate.size() == 4000 &&
                          greedy.aggregate.size() == 4000;
    if (!complete) {
      pass = false;
      detail << "S=" << S << ": incomplete runs; ";
      continue;
    }
    const double r1000 = mean_at(ofu, 1000), r4000 = mean_at(ofu, 4000);
    const bool sublinear = r4000 / 4000.0 < 0.5 * r1000 / 1000.0;
    const bool tighter = r4000 < mean_at(scaled, 4000);
    const bool beats_greedy = mean_at(greedy, 4000) > r4000;
    pass = pass && sublinear && tighter && beats_greedy;
    detail << "S=" << S << ": OFULog+ " << fmt("%.2f", r1000) << " @1000, "
           << fmt("%.2f", r4000) << " @4000 (" << (sublinear ? "sublinear" : "NOT sublinear")
           << "), radius-scaled " << fmt("%.2f", mean_at(scaled, 4000)) << ", eps-greedy "
           << fmt("%.2f", mean_at(greedy, 4000)) << "; ";
  }
  return {pass, detail.str()};
}

// Largest outward distance of `point` past any edge of a counter-clockwise polygon.
double outside_distance(const std::vector<Eigen::Vector2d>& polygon, const Eigen::Vector2d& point) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Eigen::Vector2d edge = polygon[(i + 1) % polygon.size()] - polygon[i];
    const Eigen::Vector2d normal = Eigen::Vector2d(edge.y(), -edge.x()).normalized();
    worst = std::max(worst, normal.dot(point - polygon[i]));
  }
  return worst;
}

Outcome set_snapshot() {
  constexpr double S = 5.0;
  const auto& ofu = experiment("ofulogplus", S);
  const auto& scaled = experiment("radius_scaled", S);
  if (ofu.snapshots.empty() || scaled.snapshots.empty()) {
    return {false, "missing t=4000 snapshot (seed 0 failed?)"};
  }
  const Snapshot& inner = ofu.snapshots.front();
  const Snapshot& outer = scaled.snapshots.front();
  // Strict containment: every vertex at least 1e-9 inside every edge.
  int outside = 0, outside_on_sphere = 0;
  double excess = 0.0;
  for (const auto& vertex : inner.boundary) {
    if (point_in_convex_polygon(outer.boundary, vertex, -1e-9)) continue;
    ++outside;
    outside_on_sphere += std::abs(vertex.norm() - S) <= 1e-9 * S ? 1 : 0;
    excess = std::max(excess, outside_distance(outer.boundary, vertex));
  }
  const bool covered = ofu.runs.front().always_covered();
  const bool star_inside = point_in_convex_polygon(inner.boundary, inner.theta_star);
  const bool pass = outside == 0 && (!covered || star_inside);
  // Both sets are clipped by the same ball; where they share its arc the outer
  // polygon follows it with chords, and vertices of the inner one on that arc
  // fall outside them by at most the sagitta.
  return {pass, std::to_string(inner.boundary.size() - static_cast<std::size_t>(outside)) + "/" +
                    std::to_string(inner.boundary.size()) +
                    " OFULog+ vertices strictly inside the radius-scaled polygon (" +
                    std::to_string(outside_on_sphere) + " of the " + std::to_string(outside) +
                    " outside lie on |theta| = S, max excess " + fmt("%.2g", excess) +
                    "); coverage held: " + (covered ? "yes" : "no") +
                    ", theta* inside: " + (star_inside ? "yes" : "no")};
}

Outcome radii() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big e = boost::multiprecision::exp(Big(1));
  const Big log20 = log(Big(20));
  const Big logistic = 20 * log(Big(5) * 4000 / 8 + e) + 2 * ((e - 2) + 5) * log20;
  const Big mnl = 40 * log(e + Big(5) * 4000 / 8) + 2 * ((e - 2) + sqrt(Big(18)) * 5) * log20;
  const double a = radius_logistic(2, 5.0, 4000, 0.05);
  const double b = radius_mnl(2, 3, 5.0, 4000, 0.05);
  const double ref_a = static_cast<double>(logistic), ref_b = static_cast<double>(mnl);
  const bool pass = std::abs(a - 190.76) <= 0.01 && std::abs(b - 444.41) <= 0.05 &&
                    std::abs(a - ref_a) <= 1e-12 * ref_a && std::abs(b - ref_b) <= 1e-12 * ref_b;
  return {pass, "logistic " + fmt("%.10f", a) + " (50-digit " + fmt("%.10f", ref_a) + "), mnl " +
                    fmt("%.10f", b) + " (50-digit " + fmt("%.10f", ref_b) + ")"};
}

Outcome oracle() {
  constexpr double S = 5.0;
  const int lengths[4] = {0, 10, 50, 200};
  double worst = 0.0;
  int over = 0, total = 0, not_converged = 0, grid_above = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const int n = lengths[instance % 4];
    CounterRng draw(static_cast<std::uint64_t>(instance), StreamPurpose::kInstance);
    const Vector theta_star = S * uniform_in_ball(2, draw);
    History history(2, 1);
    CounterRng arm_rng(static_cast<std::uint64_t>(instance), StreamPurpose::kArms);
    CounterRng reward_rng(static_cast<std::uint64_t>(instance), StreamPurpose::kRewards);
    for (int i = 0; i < n; ++i) {
      const Vector x = uniform_in_ball(2, arm_rng);
      history.append(x, reward_rng.uniform() < sigmoid(x.dot(theta_star)) ? 1 : 0);
    }
    const SolveReport mle = mle_ball(history.view(), S, SolverConfig{});
    const ConfidenceSpec spec(history.view(), mle.solution, mle.objective,
                              radius_logistic(2, S, n + 1, 0.05), S);
    std::vector<Vector> arms;
    for (int k = 0; k < 10; ++k) arms.push_back(uniform_in_ball(2, draw));
    const std::vector<double> grid = grid_oracle_ucb(spec, arms, 801);
    for (std::size_t k = 0; k < arms.size(); ++k) {
      const UcbResult ucb = ucb_max(spec, arms[k], SolverConfig{});
      not_converged += ucb.converged ? 0 : 1;
      const double diff = std::abs(ucb.value - grid[k]);
      worst = std::max(worst, diff);
      over += diff > 5e-3 ? 1 : 0;
      grid_above += grid[k] > ucb.upper_bound + 1e-6 ? 1 : 0;
      ++total;
    }
  }
  return {over == 0 && not_converged == 0,
          std::to_string(over) + "/" + std::to_string(total) + " arms beyond 5e-3, max " +
              fmt("%.4g", worst) + "; grid above the certified bound: " +
              std::to_string(grid_above) + "; unconverged: " + std::to_string(not_converged)};
}

Outcome lemmas() {
  bool pass = true;
  std::ostringstream detail;
  for (const std::string& name : check_names()) {
    for (const CheckReport& r : run_named_check(name, 10000, 0)) {
      pass = pass && r.pass;
      detail << r.name << (r.pass ? " ok" : " FAILED") << " (" << fmt("%.3g", r.max_violation)
             << " <= " << fmt("%.3g", r.tolerance) << "); ";
    }
  }
  return {pass, detail.str()};
}

Outcome mnl_smoke() {
  ExperimentConfig config;
  config.model = "mnl";
  config.K = 3;
  config.S = 3.0;
  config.T = 1000;
  config.seeds = 10;
  config.workers = workers();
  config.algo = "mnl_ucb_plus";
  const ExperimentResult ucb = run_experiment(config);
  config.algo = "uniform";
  const ExperimentResult uniform = run_experiment(config);
  if (ucb.failures > 0 || uniform.failures > 0) return {false, "solver failures"};
  const double r250 = mean_at(ucb, 250), r1000 = mean_at(ucb, 1000);
  const bool sublinear = r1000 / 1000.0 < 0.5 * r250 / 250.0;
  const bool beats_uniform = r1000 < mean_at(uniform, 1000);
  return {sublinear && beats_uniform,
          "MNL-UCB+ " + fmt("%.2f", r250) + " @250, " + fmt("%.2f", r1000) + " @1000 (" +
              (sublinear ? "sublinear" : "NOT sublinear: needs < " + fmt("%.2f", 2.0 * r250)) +
              "), uniform " + fmt("%.2f", mean_at(uniform, 1000)) + ", kappa " +
              fmt("%.2f", ucb.kappa_used)};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream out;
  out << file.rdbuf();
  return out.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "logbandit_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<ExperimentConfig> configs(4);
  configs[0].algo = "ofulogplus";
  configs[0].T = 300;
  configs[0].seeds = 3;
  configs[0].snapshot_rounds = {1, 300};
  configs[1].algo = "radius_scaled";
  configs[1].T = 200;
  configs[1].seeds = 2;
  configs[1].snapshot_rounds = {200};
  configs[2].algo = "eps_greedy";
  configs[2].T = 300;
  configs[2].seeds = 3;
  configs[3].model = "mnl";
  configs[3].algo = "mnl_ucb_plus";
  configs[3].K = 3;
  configs[3].S = 3.0;
  configs[3].T = 200;
  configs[3].seeds = 2;

  int files = 0, mismatches = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<std::filesystem::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      ExperimentConfig config = configs[c];
      config.workers = rep == 0 ? 1 : std::max(3, workers());
      config.out = root / (std::to_string(c) + "_" + std::to_string(rep));
      write_outputs(config, run_experiment(config));
      dirs.push_back(config.out);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      ++files;
      const auto other = dirs[1] / entry.path().filename();
      if (!std::filesystem::exists(other) || slurp(entry.path()) != slurp(other)) ++mismatches;
    }
  }
  std::filesystem::remove_all(root);
  return {mismatches == 0 && files > 0,
          std::to_string(files - mismatches) + "/" + std::to_string(files) +
              " CSV/JSON files byte-identical across reruns (1 vs " + std::to_string(std::max(3, workers())) +
              " workers)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"coverage of the logistic confidence set (200 seeds, T=500)", coverage},
      {"regret curves on the T=4000 instance, S in {5, 10}", regret_curves},
      {"t=4000 set containment, seed 0, S=5", set_snapshot},
      {"closed-form radii", radii},
      {"ucb_max vs grid oracle (100 instances, resolution 801)", oracle},
      {"lemma suite", lemmas},
      {"MNL smoke test (d=2, K=3, S=3, T=1000)", mnl_smoke},
      {"determinism of outputs", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& error) {
      outcome = {false, std::string("exception: ") + error.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s | %s[%.0f s]\n", outcome.pass ? "PASS" : "FAIL", id,
                criteria[i].first.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += outcome.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
