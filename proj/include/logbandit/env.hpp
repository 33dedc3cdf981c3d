#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "logbandit/glm.hpp"
#include "logbandit/rng.hpp"

namespace logbandit {

/// Source of the per-round arm sets.
struct ArmGenerator {
  enum class Kind { kFixed, kUniformBall };
  Kind kind = Kind::kUniformBall;
  std::vector<Vector> fixed;  // used by kFixed, identical every round
  int count = 20;             // arms per round for kUniformBall
};

struct LogisticEnvSpec {
  Vector theta_star;
  double S = 1.0;
  ArmGenerator arms;
  int horizon = 1;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(theta_star.size()); }
  /// Throws std::invalid_argument on |theta_star| > S, arms outside the unit
  /// ball, or an empty arm set.
  void validate() const;
};

struct MnlEnvSpec {
  Matrix theta_star;  // K x d
  double S = 1.0;
  Vector rho;  // K rewards, one per non-null category
  double R = 1.0;
  ArmGenerator arms;
  int horizon = 1;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(theta_star.cols()); }
  int categories() const { return static_cast<int>(theta_star.rows()); }
  void validate() const;
};

/// Arm set of round `round` (1-based). Uniform-ball sets depend only on
/// (seed, round), so every algorithm run on the same seed sees the same arms.
std::vector<Vector> arm_set(const ArmGenerator& generator, int dim, std::uint64_t seed,
                            long round);

/// Bernoulli(mu(<x, theta_star>)) draw; exactly one uniform per call.
int sample_reward(const LogisticEnvSpec& spec, const Vector& arm, CounterRng& rng);

/// Categorical draw over softmax_probs(x, Theta_star); returns 0..K with one
/// uniform per call.
int sample_reward(const MnlEnvSpec& spec, const Vector& arm, CounterRng& rng);

double expected_reward(const LogisticEnvSpec& spec, const Vector& arm);

/// rho^T mu(x, Theta_star) over the non-null categories.
double expected_reward(const MnlEnvSpec& spec, const Vector& arm);

/// Best expected reward in the set minus that of the chosen arm.
double instant_regret(const LogisticEnvSpec& spec, std::span<const Vector> arms,
                      std::size_t chosen);
double instant_regret(const MnlEnvSpec& spec, std::span<const Vector> arms, std::size_t chosen);

/// Index of the arm with the largest expected reward (lowest index on ties).
std::size_t best_arm(const LogisticEnvSpec& spec, std::span<const Vector> arms);
std::size_t best_arm(const MnlEnvSpec& spec, std::span<const Vector> arms);

struct KappaReport {
  double kappa_star = 0.0;  // inverse of the mean curvature at the optimal arms
  double kappa_arms = 0.0;  // worst inverse curvature over the played arm sets at theta_star
  double kappa = 0.0;       // sampled worst case over the parameter ball
  bool kappa_is_estimate = true;
};

/// kappa_star and kappa_X follow their definitions over the given arm sets;
/// kappa is the maximum of 1 / mu_dot(<x, theta>) over n_samples uniform
/// parameter draws per arm, hence a lower bound on the true value.
KappaReport kappa_report(const LogisticEnvSpec& spec,
                         std::span<const std::vector<Vector>> arm_sets, int n_samples,
                         CounterRng& rng);

/// MNL analogue with 1 / lambda_min(A(x, Theta)) in place of 1 / mu_dot.
KappaReport kappa_report(const MnlEnvSpec& spec, std::span<const std::vector<Vector>> arm_sets,
                         int n_samples, CounterRng& rng);

/// Sampled estimate of max 1 / lambda_min(A(x, Theta)) over unit-sphere arms and
/// Theta in the Frobenius ball of radius S, used to configure MNL-UCB+ when no
/// kappa is given.
double estimate_kappa_mnl(int dim, int categories, double S, int n_samples, CounterRng& rng);

/// The experimental instance: d = 2, T = 4000, theta_star = (S - 1)/sqrt(2) (1, 1),
/// 20 fresh uniform-in-ball arms per round. Only S in {5, 10} is accepted.
LogisticEnvSpec paper_instance(double S, std::uint64_t seed = 0);

/// Default MNL parameter: row k has norm (S - 1)/sqrt(K) and points at angle
/// (k - 1) pi / (2 K) in the first two coordinates (all mass on the first
/// coordinate when d = 1), so |Theta|_F = S - 1 (S / 2 when S <= 2).
Matrix default_mnl_theta(int dim, int categories, double S);

}  // namespace logbandit
