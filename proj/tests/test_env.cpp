#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "logbandit/env.hpp"
#include "logbandit/rng.hpp"

using namespace logbandit;

namespace {

LogisticEnvSpec fixed_env(const Vector& theta_star, std::vector<Vector> arms, double S = 5.0) {
  LogisticEnvSpec spec;
  spec.theta_star = theta_star;
  spec.S = S;
  spec.arms.kind = ArmGenerator::Kind::kFixed;
  spec.arms.fixed = std::move(arms);
  return spec;
}

}  // namespace

TEST_CASE("counter rng is reproducible and seekable") {
  CounterRng a(42, StreamPurpose::kArms, 7), b(42, StreamPurpose::kArms, 7);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng other(42, StreamPurpose::kRewards, 7);
  CounterRng c(42, StreamPurpose::kArms, 7);
  CHECK(c.next_u64() != other.next_u64());

  CounterRng s(1, StreamPurpose::kArms);
  s.seek(5);
  const double first = s.uniform();
  s.seek(9);
  (void)s.uniform();
  s.seek(5);
  CHECK(s.uniform() == first);
  CHECK(s.draws() == 1);

  CounterRng u(3, StreamPurpose::kLemma);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("uniform_in_ball has the right radial law") {
  CounterRng rng(1, StreamPurpose::kLemma);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double r = uniform_in_ball(2, rng).norm();
    CHECK(r <= 1.0);
    sum += r;
  }
  CHECK(std::abs(sum / n - 2.0 / 3.0) <= 0.005);
  CHECK(uniform_on_sphere(3, rng).norm() == doctest::Approx(1.0));
}

TEST_CASE("logistic rewards") {
  const auto spec = fixed_env(Eigen::Vector2d(0.0, 3.0), {Eigen::Vector2d(1.0, 0.0)});
  CHECK(expected_reward(spec, Eigen::Vector2d(1.0, 0.0)) == 0.5);
  CounterRng rng(2, StreamPurpose::kRewards);
  long ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ones += sample_reward(spec, Eigen::Vector2d(1.0, 0.0), rng);
  CHECK(rng.draws() == static_cast<std::uint64_t>(n));
  CHECK(std::abs(static_cast<double>(ones) / n - 0.5) <= 0.006);

  const auto saturated = fixed_env(Eigen::Vector2d(20.0, 0.0), {Eigen::Vector2d(1.0, 0.0)}, 20.0);
  for (int i = 0; i < 1000; ++i) CHECK(sample_reward(saturated, Eigen::Vector2d(1.0, 0.0), rng) == 1);
}

TEST_CASE("mnl rewards are uniform at zero parameter") {
  MnlEnvSpec spec;
  spec.theta_star = Matrix::Zero(3, 2);
  spec.S = 1.0;
  spec.rho = Vector::Constant(3, 1.0 / std::sqrt(3.0));
  CounterRng rng(3, StreamPurpose::kRewards);
  std::vector<long> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_reward(spec, Eigen::Vector2d(0.6, 0.8), rng)];
  CHECK(rng.draws() == static_cast<std::uint64_t>(n));
  double chi2 = 0.0;
  for (long c : counts) chi2 += std::pow(c - n / 4.0, 2) / (n / 4.0);
  // 0.999 quantile of chi-square with 3 degrees of freedom.
  CHECK(chi2 < 16.266);
}

TEST_CASE("instant regret") {
  // Arms with means 0.7 and 0.6.
  const Vector a = Eigen::Vector2d(std::log(0.7 / 0.3), 0.0);
  const Vector b = Eigen::Vector2d(std::log(0.6 / 0.4), 0.0);
  const auto spec = fixed_env(Eigen::Vector2d(1.0, 0.0), {a, b});
  const std::vector<Vector> arms = {a, b};
  CHECK(instant_regret(spec, arms, 0) == 0.0);
  CHECK(instant_regret(spec, arms, 1) == doctest::Approx(0.1).epsilon(1e-14));
  const std::vector<Vector> swapped = {b, a};
  CHECK(instant_regret(spec, swapped, 0) == instant_regret(spec, arms, 1));
  CHECK(best_arm(spec, arms) == 0);
  const std::vector<Vector> dup = {b, b};
  CHECK(best_arm(spec, dup) == 0);

  MnlEnvSpec mnl;
  mnl.theta_star = default_mnl_theta(2, 3, 3.0);
  mnl.S = 3.0;
  mnl.rho = Vector::Constant(3, 1.0 / std::sqrt(3.0));
  CounterRng rng(4, StreamPurpose::kArms);
  std::vector<Vector> set;
  for (int i = 0; i < 10; ++i) set.push_back(uniform_in_ball(2, rng));
  const std::size_t best = best_arm(mnl, set);
  CHECK(instant_regret(mnl, set, best) == 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) CHECK(instant_regret(mnl, set, i) >= 0.0);
  const Vector p = softmax_probs(set[0], mnl.theta_star);
  CHECK(expected_reward(mnl, set[0]) == doctest::Approx(mnl.rho.dot(p.tail(3))));
}

TEST_CASE("kappa report") {
  auto spec = fixed_env(Vector::Zero(1), {Vector::Ones(1)});
  const std::vector<std::vector<Vector>> sets = {{Vector::Ones(1)}};
  CounterRng rng(5, StreamPurpose::kKappa);
  const KappaReport r = kappa_report(spec, sets, 10000, rng);
  CHECK(r.kappa_arms == 4.0);
  CHECK(r.kappa_star == 4.0);
  CHECK(r.kappa_is_estimate);
  // 1/mu_dot(5) = 2 + e^5 + e^-5 = 150.41989704957568889 (mpmath).
  CHECK(r.kappa <= 150.41989704957568889 + 1e-9);
  CHECK(r.kappa >= 0.98 * 150.41989704957568889);

  const double mnl_kappa = estimate_kappa_mnl(2, 3, 3.0, 2000, rng);
  CHECK(mnl_kappa > 4.0);
}

TEST_CASE("experiment instance") {
  const LogisticEnvSpec s5 = paper_instance(5.0);
  CHECK(s5.theta_star(0) == doctest::Approx(2.8284271247461903));
  CHECK(s5.theta_star(1) == doctest::Approx(2.8284271247461903));
  CHECK(s5.theta_star.norm() == doctest::Approx(4.0));
  CHECK(s5.horizon == 4000);
  CHECK(s5.arms.count == 20);
  CHECK(paper_instance(10.0).theta_star.norm() == doctest::Approx(9.0));
  CHECK_THROWS_AS(paper_instance(7.0), std::invalid_argument);

  for (long t = 1; t <= 50; ++t) {
    const auto arms = arm_set(s5.arms, 2, 9, t);
    CHECK(arms.size() == 20);
    for (const Vector& x : arms) CHECK(x.norm() <= 1.0);
    const auto again = arm_set(s5.arms, 2, 9, t);
    for (std::size_t i = 0; i < arms.size(); ++i) CHECK(arms[i] == again[i]);
  }
}

TEST_CASE("default MNL parameter") {
  const Matrix theta = default_mnl_theta(2, 3, 3.0);
  CHECK(theta.norm() == doctest::Approx(2.0));
  CHECK(default_mnl_theta(1, 2, 1.0).norm() == doctest::Approx(0.5));
}

TEST_CASE("spec validation") {
  auto bad = fixed_env(Eigen::Vector2d(6.0, 0.0), {Eigen::Vector2d(1.0, 0.0)});
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  auto far_arm = fixed_env(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.5, 0.0)});
  CHECK_THROWS_AS(far_arm.validate(), std::invalid_argument);
  auto ok = fixed_env(Eigen::Vector2d(1.0, 0.0), {Eigen::Vector2d(1.0, 0.0)});
  CHECK_NOTHROW(ok.validate());
}
