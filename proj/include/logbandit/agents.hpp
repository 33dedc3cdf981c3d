#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logbandit/confidence.hpp"
#include "logbandit/history.hpp"
#include "logbandit/optim.hpp"
#include "logbandit/rng.hpp"

namespace logbandit {

struct PolicyParams {
  double S = 1.0;
  double delta = 0.05;
  SolverConfig solver;

  // OFULog+ and its radius-scaled variant.
  double radius_scale = 1.0;
  // Skip the exact solve for arms whose cheap upper bound is already beaten.
  // The chosen arm is the same either way.
  bool screen_arms = true;

  // epsilon-greedy / uniform exploration.
  double eps = 0.1;
  std::uint64_t seed = 0;

  // MNL-UCB+.
  double c_gamma = 1.0;
  std::optional<double> kappa;
  std::optional<double> R;
  std::optional<double> L = 0.5;
  Vector rho;
};

struct AgentState {
  History history;
  SolveReport mle;
  long t = 1;  // always history.size() + 1
  PolicyParams params;
};

/// What the agent saw and computed in its last choose() call.
struct DecisionRecord {
  long t = 0;
  std::size_t arm = 0;
  std::vector<double> scores;   // per-arm UCB (NaN if screened out), or mean + bonus for MNL-UCB+
  std::vector<double> upper_bounds;  // OFULog+ screening bounds
  std::vector<double> bonuses;  // MNL-UCB+ only
  double radius_sq = 0.0;
  int solver_iterations = 0;
};

/// Sequential policy: observe an arm set, choose an index, ingest the
/// outcome. Agents only ever see arms and sampled outcomes.
class Agent {
 public:
  Agent(int dim, int categories, PolicyParams params);
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;

  /// Index into `arms`, ties broken by the lowest index. Throws SolverError
  /// when an inner solve fails to converge.
  virtual std::size_t choose(std::span<const Vector> arms) = 0;

  /// Appends (arm, outcome), refreshes the MLE warm-started from the previous
  /// one and advances t. Throws SolverError if the MLE does not converge.
  void update(const Vector& arm, int outcome);

  /// Loss-based confidence set around the current MLE with the radius the
  /// agent plays with (the logistic or MNL closed form unless overridden).
  virtual ConfidenceSpec confidence_set() const;

  const AgentState& state() const { return state_; }
  const DecisionRecord& last_decision() const { return decision_; }
  int dim() const { return state_.history.dim(); }
  int categories() const { return state_.history.categories(); }

 protected:
  virtual void on_update(const Vector& /*arm*/) {}
  double theory_radius_sq() const;

  AgentState state_;
  DecisionRecord decision_;
};

/// OFULog+: plays argmax_x max_{theta in C_t} <x, theta>. A radius scale other
/// than one gives the radius-scaled baseline.
class OfuLogPlus : public Agent {
 public:
  OfuLogPlus(int dim, PolicyParams params);
  std::string_view name() const override;
  std::size_t choose(std::span<const Vector> arms) override;
  ConfidenceSpec confidence_set() const override;
};

/// With probability eps a uniformly random arm, otherwise argmax <x, theta_hat>.
class EpsGreedy : public Agent {
 public:
  EpsGreedy(int dim, PolicyParams params);
  std::string_view name() const override { return "eps_greedy"; }
  std::size_t choose(std::span<const Vector> arms) override;

 private:
  CounterRng rng_;
};

/// Uniformly random arm each round, for either model.
class UniformAgent : public Agent {
 public:
  UniformAgent(int dim, int categories, PolicyParams params);
  std::string_view name() const override { return "uniform"; }
  std::size_t choose(std::span<const Vector> arms) override;

 private:
  CounterRng rng_;
};

/// V_t = 2 kappa lambda I + sum_s x_s x_s^T with lambda = K / (4 S^2); the
/// inverse is kept up to date by Sherman-Morrison.
class MnlDesignState {
 public:
  MnlDesignState(int dim, int categories, double S, double kappa);

  void add(const Vector& arm);
  double inverse_norm(const Vector& arm) const;  // |x|_{V^{-1}}
  double lambda() const { return lambda_; }
  double regularizer() const { return 2.0 * kappa_ * lambda_; }
  const Matrix& matrix() const { return design_; }
  const Matrix& inverse() const { return inverse_; }
  double lambda_min() const;

 private:
  double kappa_;
  double lambda_;
  Matrix design_;
  Matrix inverse_;
};

/// MNL-UCB+: argmax rho^T mu(x, Theta_hat) + sqrt(2 kappa) R L gamma_t |x|_{V^{-1}}.
class MnlUcbPlus : public Agent {
 public:
  /// Throws std::invalid_argument when kappa, R or L is unset or out of range,
  /// or rho has the wrong size.
  MnlUcbPlus(int dim, int categories, PolicyParams params);
  std::string_view name() const override { return "mnl_ucb_plus"; }
  std::size_t choose(std::span<const Vector> arms) override;

  double bonus(const Vector& arm) const;
  const MnlDesignState& design() const { return design_; }

 protected:
  void on_update(const Vector& arm) override;

 private:
  MnlDesignState design_;
};

/// Baselines selectable by name: "eps_greedy" or "radius_scaled" (also
/// "radius_scaled_ofulog"). Throws std::invalid_argument for other names.
std::unique_ptr<Agent> make_baseline(std::string_view kind, int dim, PolicyParams params);

/// Any agent by name: "ofulogplus", "mnl_ucb_plus", "uniform" or a baseline.
std::unique_ptr<Agent> make_agent(std::string_view kind, int dim, int categories,
                                  PolicyParams params);

}  // namespace logbandit
