#include "logbandit/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace logbandit {

namespace {

void validate_arms(const ArmGenerator& arms, int dim) {
  if (arms.kind == ArmGenerator::Kind::kFixed) {
    if (arms.fixed.empty()) throw std::invalid_argument("env: fixed arm list is empty");
    for (const Vector& x : arms.fixed) {
      if (x.size() != dim) throw std::invalid_argument("env: arm dimension mismatch");
      if (x.norm() > 1.0 + 1e-12) throw std::invalid_argument("env: arm outside the unit ball");
    }
  } else if (arms.count < 1) {
    throw std::invalid_argument("env: arm count must be positive");
  }
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

template <class Spec>
std::size_t best_arm_impl(const Spec& spec, std::span<const Vector> arms) {
  if (arms.empty()) throw std::invalid_argument("best_arm: empty arm set");
  std::size_t best = 0;
  double best_value = expected_reward(spec, arms[0]);
  for (std::size_t i = 1; i < arms.size(); ++i) {
    const double value = expected_reward(spec, arms[i]);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

template <class Spec>
double instant_regret_impl(const Spec& spec, std::span<const Vector> arms, std::size_t chosen) {
  if (chosen >= arms.size()) throw std::out_of_range("instant_regret: chosen arm out of range");
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& x : arms) best = std::max(best, expected_reward(spec, x));
  return std::max(0.0, best - expected_reward(spec, arms[chosen]));
}

}  // namespace

void LogisticEnvSpec::validate() const {
  if (theta_star.size() < 1) throw std::invalid_argument("env: empty theta_star");
  if (!(S > 0.0)) throw std::invalid_argument("env: S must be positive");
  if (theta_star.norm() > S * (1.0 + 1e-12)) {
    throw std::invalid_argument("env: |theta_star| exceeds S");
  }
  if (horizon < 1) throw std::invalid_argument("env: horizon must be positive");
  validate_arms(arms, dim());
}

void MnlEnvSpec::validate() const {
  if (theta_star.size() < 1) throw std::invalid_argument("env: empty Theta_star");
  if (!(S > 0.0)) throw std::invalid_argument("env: S must be positive");
  if (theta_star.norm() > S * (1.0 + 1e-12)) {
    throw std::invalid_argument("env: |Theta_star|_F exceeds S");
  }
  if (rho.size() != categories()) throw std::invalid_argument("env: rho must have K entries");
  if (rho.norm() > R * (1.0 + 1e-12)) throw std::invalid_argument("env: |rho| exceeds R");
  if (horizon < 1) throw std::invalid_argument("env: horizon must be positive");
  validate_arms(arms, dim());
}

std::vector<Vector> arm_set(const ArmGenerator& generator, int dim, std::uint64_t seed,
                            long round) {
  if (generator.kind == ArmGenerator::Kind::kFixed) {
    return generator.fixed;
  }
  CounterRng rng(seed, StreamPurpose::kArms, static_cast<std::uint64_t>(round));
  std::vector<Vector> arms;
  arms.reserve(static_cast<std::size_t>(generator.count));
  for (int i = 0; i < generator.count; ++i) {
    arms.push_back(uniform_in_ball(dim, rng));
  }
  return arms;
}

int sample_reward(const LogisticEnvSpec& spec, const Vector& arm, CounterRng& rng) {
  return rng.uniform() < expected_reward(spec, arm) ? 1 : 0;
}

int sample_reward(const MnlEnvSpec& spec, const Vector& arm, CounterRng& rng) {
  const Vector probs = softmax_probs(arm, spec.theta_star);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    cumulative += probs(k);
    if (u < cumulative) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size() - 1);
}

double expected_reward(const LogisticEnvSpec& spec, const Vector& arm) {
  return sigmoid(arm.dot(spec.theta_star));
}

double expected_reward(const MnlEnvSpec& spec, const Vector& arm) {
  return spec.rho.dot(softmax_probs(arm, spec.theta_star).tail(spec.categories()));
}

double instant_regret(const LogisticEnvSpec& spec, std::span<const Vector> arms,
                      std::size_t chosen) {
  return instant_regret_impl(spec, arms, chosen);
}

double instant_regret(const MnlEnvSpec& spec, std::span<const Vector> arms, std::size_t chosen) {
  return instant_regret_impl(spec, arms, chosen);
}

std::size_t best_arm(const LogisticEnvSpec& spec, std::span<const Vector> arms) {
  return best_arm_impl(spec, arms);
}

std::size_t best_arm(const MnlEnvSpec& spec, std::span<const Vector> arms) {
  return best_arm_impl(spec, arms);
}

KappaReport kappa_report(const LogisticEnvSpec& spec,
                         std::span<const std::vector<Vector>> arm_sets, int n_samples,
                         CounterRng& rng) {
  KappaReport report;
  double curvature_sum = 0.0;
  long rounds = 0;
  for (const auto& arms : arm_sets) {
    if (arms.empty()) continue;
    const Vector& best = arms[best_arm(spec, arms)];
    curvature_sum += sigmoid_derivative(best.dot(spec.theta_star));
    ++rounds;
    for (const Vector& x : arms) {
      report.kappa_arms =
          std::max(report.kappa_arms, 1.0 / sigmoid_derivative(x.dot(spec.theta_star)));
      for (int i = 0; i < n_samples; ++i) {
        const Vector theta = spec.S * uniform_in_ball(spec.dim(), rng);
        report.kappa = std::max(report.kappa, 1.0 / sigmoid_derivative(x.dot(theta)));
      }
    }
  }
  if (rounds > 0) report.kappa_star = static_cast<double>(rounds) / curvature_sum;
  return report;
}

KappaReport kappa_report(const MnlEnvSpec& spec, std::span<const std::vector<Vector>> arm_sets,
                         int n_samples, CounterRng& rng) {
  KappaReport report;
  const int p = spec.categories() * spec.dim();
  double curvature_sum = 0.0;
  long rounds = 0;
  for (const auto& arms : arm_sets) {
    if (arms.empty()) continue;
    const Vector& best = arms[best_arm(spec, arms)];
    curvature_sum += min_eigenvalue(a_matrix(best, spec.theta_star));
    ++rounds;
    for (const Vector& x : arms) {
      report.kappa_arms =
          std::max(report.kappa_arms, 1.0 / min_eigenvalue(a_matrix(x, spec.theta_star)));
      for (int i = 0; i < n_samples; ++i) {
        const Vector flat = spec.S * uniform_in_ball(p, rng);
        const Matrix theta = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                            Eigen::Dynamic, Eigen::RowMajor>>(
            flat.data(), spec.categories(), spec.dim());
        report.kappa = std::max(report.kappa, 1.0 / min_eigenvalue(a_matrix(x, theta)));
      }
    }
  }
  if (rounds > 0) report.kappa_star = static_cast<double>(rounds) / curvature_sum;
  return report;
}

double estimate_kappa_mnl(int dim, int categories, double S, int n_samples, CounterRng& rng) {
  const int p = dim * categories;
  double kappa = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const Vector x = uniform_on_sphere(dim, rng);
    // Half the draws on the boundary sphere, where the extremes live.
    const Vector flat = S * (i % 2 == 0 ? uniform_on_sphere(p, rng) : uniform_in_ball(p, rng));
    const Matrix theta =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            flat.data(), categories, dim);
    kappa = std::max(kappa, 1.0 / min_eigenvalue(a_matrix(x, theta)));
  }
  return kappa;
}

LogisticEnvSpec paper_instance(double S, std::uint64_t seed) {
  if (S != 5.0 && S != 10.0) {
    throw std::invalid_argument("paper_instance: S must be 5 or 10");
  }
  LogisticEnvSpec spec;
  spec.S = S;
  spec.theta_star = Vector::Constant(2, (S - 1.0) / std::sqrt(2.0));
  spec.arms.kind = ArmGenerator::Kind::kUniformBall;
  spec.arms.count = 20;
  spec.horizon = 4000;
  spec.seed = seed;
  return spec;
}

Matrix default_mnl_theta(int dim, int categories, double S) {
  Matrix theta = Matrix::Zero(categories, dim);
  const double total = S > 2.0 ? S - 1.0 : 0.5 * S;
  const double row_norm = total / std::sqrt(static_cast<double>(categories));
  for (int k = 0; k < categories; ++k) {
    const double angle = k * std::numbers::pi / (2.0 * categories);
    if (dim == 1) {
      theta(k, 0) = row_norm;
    } else {
      theta(k, 0) = row_norm * std::cos(angle);
      theta(k, 1) = row_norm * std::sin(angle);
    }
  }
  return theta;
}

}  // namespace logbandit
