#pragma once

#include "logbandit/confidence.hpp"
#include "logbandit/env.hpp"
#include "logbandit/history.hpp"
#include "logbandit/optim.hpp"
#include "logbandit/rng.hpp"

namespace testing_support {

using namespace logbandit;

// n logistic observations on uniform-in-ball arms, rewards drawn from theta_star.
inline History random_history(const Vector& theta_star, int n, std::uint64_t seed) {
  History history(static_cast<int>(theta_star.size()), 1);
  CounterRng arms(seed, StreamPurpose::kArms);
  CounterRng rewards(seed, StreamPurpose::kRewards);
  for (int i = 0; i < n; ++i) {
    const Vector x = uniform_in_ball(static_cast<int>(theta_star.size()), arms);
    history.append(x, rewards.uniform() < sigmoid(x.dot(theta_star)) ? 1 : 0);
  }
  return history;
}

// Set centered at the ball-constrained MLE of `history`.
inline ConfidenceSpec spec_for(const History& history, double S, double radius_sq) {
  const SolveReport mle = mle_ball(history.view(), S, SolverConfig{});
  return ConfidenceSpec(history.view(), mle.solution, mle.objective, radius_sq, S);
}

}  // namespace testing_support
