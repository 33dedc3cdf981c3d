#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "logbandit/confidence.hpp"
#include "logbandit/history.hpp"

namespace logbandit {

struct SolverConfig {
  int max_iters = 2000;
  double grad_tol = 1e-8;  // on the norm of the projected-gradient mapping
  double backtrack = 0.5;
  double armijo = 1e-4;
  double penalty_growth = 10.0;  // cap on the multiplier growth per UCB stage
  double ucb_gap_tol = 1e-9;     // certified UCB gap, relative to max(1, S |x|)
  double ucb_inner_tol = 1e-10;  // gradient mapping of the UCB subproblems

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct SolveReport {
  Vector solution;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

struct UcbResult {
  double value = 0.0;
  Vector maximizer;
  double upper_bound = 0.0;  // certified: the true maximum lies in [value, upper_bound]
  int iterations = 0;  // projected-gradient steps over all stages
  int stages = 0;      // multiplier values tried
  bool converged = false;
  double violation = 0.0;  // max(0, gap - radius_sq) at the maximizer
  double kkt_residual = 0.0;
};

/// Run-fatal solver failure, raised by the agents when a solve does not
/// converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Euclidean (Frobenius for flattened matrices) projection onto the ball of
/// radius S.
Vector project_ball(const Vector& theta, double S);

/// Norm-constrained unregularized MLE: minimizes the cumulative loss of the
/// view over the ball of radius S by projected gradient descent with
/// Barzilai-Borwein trial steps and Armijo backtracking. Starts from zero
/// unless a warm start is given. An empty history returns zero with zero
/// iterations.
SolveReport mle_ball(const HistoryView& history, double S, const SolverConfig& config,
                     const std::optional<Vector>& warm_start = std::nullopt);

/// max <x, theta> over the confidence set. If the ball maximizer S x / |x| is
/// a member it is returned directly. Otherwise the loss constraint is active
/// and the solver walks the multiplier path theta(t) = argmin over the ball of
/// gap(theta) - t <x, theta>, each point found by projected descent warm-started
/// from the neighbouring ones (the first from the set's center). Every solved t
/// gives an upper bound on the maximum and every member a lower bound; t is
/// updated by a secant step on sqrt(gap) until the bounds are within
/// config.ucb_gap_tol max(1, S |x|). The returned maximizer is a member
/// (violation 0) and value is its objective. Throws std::invalid_argument when
/// the arm and the parameter dimensions differ.
UcbResult ucb_max(const ConfidenceSpec& spec, const Vector& arm, const SolverConfig& config);

/// Cheap upper bounds on ucb_max for each arm, from the ellipsoid
/// gap(theta) >= <g, D> + D^T H D / (2 + 2S), D = theta - center, that follows
/// from the logistic self-concordance bound. Falls back to S |x| for MNL sets,
/// empty histories and singular curvature.
std::vector<double> ucb_upper_bounds(const ConfidenceSpec& spec, std::span<const Vector> arms);

/// Brute-force maximum of <x, theta> over a uniform grid of [-S, S]^d
/// (`resolution` points per axis) restricted to members of the set. The
/// membership mask is shared by all arms. Throws std::invalid_argument for
/// d > 3 or resolution < 2. Returns -infinity for an arm when no grid point
/// is a member.
std::vector<double> grid_oracle_ucb(const ConfidenceSpec& spec, std::span<const Vector> arms,
                                    int resolution);

double grid_oracle_ucb(const ConfidenceSpec& spec, const Vector& arm, int resolution);

}  // namespace logbandit
