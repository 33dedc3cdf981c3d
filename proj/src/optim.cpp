#include "logbandit/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace logbandit {

void SolverConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be positive");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("SolverConfig: grad_tol must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw std::invalid_argument("SolverConfig: backtrack factor must lie in (0, 1)");
  }
  if (!(armijo > 0.0 && armijo < 1.0)) {
    throw std::invalid_argument("SolverConfig: armijo constant must lie in (0, 1)");
  }
  if (!(penalty_growth > 1.0)) {
    throw std::invalid_argument("SolverConfig: penalty growth must exceed 1");
  }
  if (!(ucb_gap_tol > 0.0) || !(ucb_inner_tol > 0.0)) {
    throw std::invalid_argument("SolverConfig: UCB tolerances must be positive");
  }
}

Vector project_ball(const Vector& theta, double S) {
  const double norm = theta.norm();
  if (norm <= S) {
    return theta;
  }
  return theta * (S / norm);
}

namespace {

struct DescentResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Projected gradient descent over a convex objective on the ball, with
// Barzilai-Borwein trial steps and Armijo backtracking along the projection
// arc. `value_grad(x, g)` returns f(x) and writes its gradient. Sufficient
// decrease is tested with a round-off allowance proportional to |f| so that
// the iteration can keep reducing the gradient mapping once f stops changing
// in floating point.
template <class ValueGrad>
DescentResult projected_descent(ValueGrad&& value_grad, Vector x, double radius,
                                double initial_step, double tol, int max_iters,
                                const SolverConfig& config) {
  DescentResult out;
  Vector grad(x.size());
  double f = value_grad(x, grad);
  double step = initial_step;
  Vector trial_grad(x.size());

  int iter = 0;
  for (;; ++iter) {
    out.residual = (x - project_ball(x - grad, radius)).norm();
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
    if (iter >= max_iters) {
      break;
    }

    const double noise = 1e-13 * (1.0 + std::abs(f));
    double alpha = step;
    Vector trial;
    double f_trial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = project_ball(x - alpha * grad, radius);
      f_trial = value_grad(trial, trial_grad);
      if (f_trial <= f + config.armijo * grad.dot(trial - x) + noise) {
        accepted = true;
        break;
      }
      // f can be a small difference of large sums (the UCB Lagrangian near the
      // boundary), so its round-off hides real decrease. For convex f a
      // nonpositive slope at the trial point already proves f(trial) <= f(x).
      if (trial_grad.dot(trial - x) <= 0.0 && trial != x) {
        accepted = true;
        break;
      }
      alpha *= config.backtrack;
    }
    if (!accepted) {
      break;
    }

    const Vector s = trial - x;
    const Vector y = trial_grad - grad;
    const double sy = s.dot(y);
    const double ss = s.squaredNorm();
    if (ss == 0.0) {
      // No movement: the projected step is stationary at this resolution.
      x = trial;
      f = f_trial;
      grad = trial_grad;
      out.residual = (x - project_ball(x - grad, radius)).norm();
      out.converged = out.residual <= tol;
      ++iter;
      break;
    }
    step = sy > 0.0 ? ss / sy : 2.0 * alpha;
    step = std::clamp(step, 1e-12, 1e12);
    x = std::move(trial);
    f = f_trial;
    grad = trial_grad;
  }
  out.x = std::move(x);
  out.value = f;
  out.iterations = iter;
  return out;
}

}  // namespace

SolveReport mle_ball(const HistoryView& history, double S, const SolverConfig& config,
                     const std::optional<Vector>& warm_start) {
  config.validate();
  const int p = history.param_size();
  SolveReport report;
  if (history.size() == 0) {
    report.solution = Vector::Zero(p);
    report.converged = true;
    return report;
  }
  Vector start = warm_start ? project_ball(*warm_start, S) : Vector::Zero(p);
  if (start.size() != p) {
    throw std::invalid_argument("mle_ball: warm start has the wrong dimension");
  }
  // Hessian of the logistic loss is bounded by sum |x|^2 / 4, of the MNL loss
  // by sum |x|^2 / 2.
  const double curvature =
      (history.categories() == 1 ? 0.25 : 0.5) * history.history().arm_energy(history.size());
  const double initial_step = curvature > 0.0 ? 1.0 / curvature : 1.0;

  auto value_grad = [&](const Vector& theta, Vector& grad) {
    return history.loss_grad(theta, grad);
  };
  DescentResult result = projected_descent(value_grad, std::move(start), S, initial_step,
                                           config.grad_tol, config.max_iters, config);
  report.solution = std::move(result.x);
  report.objective = result.value;
  report.iterations = result.iterations;
  report.converged = result.converged;
  report.kkt_residual = result.residual;
  return report;
}

UcbResult ucb_max(const ConfidenceSpec& spec, const Vector& arm, const SolverConfig& config) {
  config.validate();
  if (arm.size() != spec.param_size()) {
    throw std::invalid_argument("ucb_max: arm dimension does not match the parameter");
  }
  const double S = spec.norm_bound();
  const double radius_sq = spec.radius_sq();
  UcbResult out;

  const double arm_norm = arm.norm();
  if (arm_norm == 0.0) {
    out.maximizer = spec.center();
    out.converged = true;
    return out;
  }

  // The ball maximizer solves the problem whenever it satisfies the loss
  // constraint.
  const Vector ball_max = arm * (S / arm_norm);
  if (spec.loss_gap(ball_max) <= radius_sq) {
    out.value = S * arm_norm;
    out.upper_bound = out.value;
    out.maximizer = ball_max;
    out.converged = true;
    return out;
  }

  // Otherwise the loss constraint is active. theta(t) = argmin over the ball of
  // gap(theta) - t <x, theta> traces the boundary as t grows, and
  //   <x, theta(t)> + (radius_sq - gap(theta(t))) / t
  // bounds the optimum from above for every t > 0. Feasible points bound it
  // from below; stop once the two meet.
  const double curvature = 0.25 * spec.history().history().arm_energy(spec.history().size());
  const double initial_step = curvature > 0.0 ? 1.0 / curvature : 1.0;
  const double gap_tol = config.ucb_gap_tol * std::max(1.0, S * arm_norm);

  auto solve_at = [&](double t, Vector& theta, DescentResult& result) {
    auto value_grad = [&](const Vector& point, Vector& grad) {
      const double gap = spec.loss_gap_grad(point, grad);
      grad -= t * arm;
      return gap - t * arm.dot(point);
    };
    result = projected_descent(value_grad, theta, S, initial_step,
                               config.ucb_inner_tol * std::max(1.0, t * arm_norm),
                               config.max_iters, config);
    theta = result.x;
    return result.value + t * arm.dot(theta);
  };

  Vector lo_theta = spec.center();
  double lo_t = 0.0;
  double lo_gap = spec.loss_gap(lo_theta);
  double lower = -std::numeric_limits<double>::infinity();
  if (lo_gap <= radius_sq) {
    lower = arm.dot(lo_theta);
    out.maximizer = lo_theta;
  }
  lo_gap = std::max(0.0, lo_gap);
  double upper = S * arm_norm;
  Vector hi_theta;
  double hi_t = std::numeric_limits<double>::infinity();
  double hi_gap = 0.0;

  // Near the center gap(theta(t)) grows like t^2, so the first guess is the t
  // at which a quadratic with the worst-case curvature reaches radius_sq.
  double t = std::sqrt(2.0 * radius_sq * std::max(curvature, 1e-12)) / arm_norm;
  if (!(t > 0.0)) t = 1e-12;
  const double target = std::sqrt(radius_sq);

  constexpr int kMaxStages = 200;
  DescentResult result;
  int last_side = 0;  // -1 after moving lo, +1 after moving hi
  for (int stage = 0; stage < kMaxStages; ++stage) {
    Vector theta = lo_theta;
    if (std::isfinite(hi_t)) {
      theta = lo_theta + ((t - lo_t) / (hi_t - lo_t)) * (hi_theta - lo_theta);
    }
    const double gap = solve_at(t, theta, result);
    out.iterations += result.iterations;
    out.stages = stage + 1;
    out.kkt_residual = result.residual;

    const double value = arm.dot(theta);
    if (result.converged) {
      upper = std::min(upper, value + (radius_sq - gap) / t);
    }
    if (gap <= radius_sq && value > lower) {
      lower = value;
      out.maximizer = theta;
    }
    if (upper - lower <= gap_tol) {
      out.converged = true;
      break;
    }

    const int side = gap < radius_sq ? -1 : 1;
    const bool repeated = side == last_side;
    last_side = side;
    if (side < 0) {
      lo_t = t;
      lo_gap = gap;
      lo_theta = std::move(theta);
    } else {
      hi_t = t;
      hi_gap = gap;
      hi_theta = std::move(theta);
    }
    // Secant on sqrt(gap), which is close to linear in t.
    const double lo_root = std::sqrt(std::max(0.0, lo_gap));
    double next;
    if (!std::isfinite(hi_t)) {
      const double grow = lo_root > 0.0 ? 1.05 * target / lo_root : config.penalty_growth;
      next = t * std::min(grow, config.penalty_growth);
    } else {
      const double hi_root = std::sqrt(hi_gap);
      next = lo_t + (target - lo_root) * (hi_t - lo_t) / (hi_root - lo_root);
      // The secant stalls where gap is flat in t (maximizer on the sphere);
      // a second move of the same endpoint bisects instead.
      if (repeated || !(next > lo_t && next < hi_t)) next = 0.5 * (lo_t + hi_t);
    }
    if (next == t) break;
    t = next;
  }
  out.value = lower;
  // The certificate can land an ulp below the value it certifies.
  out.upper_bound = std::max(upper, lower);
  out.violation = std::isfinite(lower) ? 0.0 : std::numeric_limits<double>::infinity();
  if (!std::isfinite(lower)) {
    out.converged = false;
    out.maximizer = spec.center();
  }
  return out;
}

std::vector<double> ucb_upper_bounds(const ConfidenceSpec& spec, std::span<const Vector> arms) {
  const double S = spec.norm_bound();
  std::vector<double> bounds;
  bounds.reserve(arms.size());
  for (const Vector& x : arms) bounds.push_back(S * x.norm());
  const HistoryView& view = spec.history();
  if (view.categories() != 1 || view.size() == 0) return bounds;

  // gap(theta) >= <g, D> + D^T H D / (2 + 2S) with D = theta - center,
  // g and H the loss gradient and curvature at the center, since every
  // |<x_s, D>| <= 2S. The set lies in that ellipsoid.
  Vector grad(spec.param_size());
  spec.loss_gap_grad(spec.center(), grad);
  const Matrix shape = view.loss_hessian(spec.center()) / (2.0 + 2.0 * S);
  const Eigen::LLT<Matrix> llt(shape);
  if (llt.info() != Eigen::Success) return bounds;
  const Vector shift = -0.5 * llt.solve(grad);
  const double level = spec.radius_sq() + 0.25 * grad.dot(llt.solve(grad));
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const Vector& x = arms[i];
    const double width = std::sqrt(std::max(0.0, level * x.dot(llt.solve(x))));
    const double bound = x.dot(spec.center() + shift) + width;
    // Slack for round-off in the bound itself.
    bounds[i] = std::min(bounds[i], bound + 1e-9 * (1.0 + std::abs(bound)));
  }
  return bounds;
}

std::vector<double> grid_oracle_ucb(const ConfidenceSpec& spec, std::span<const Vector> arms,
                                    int resolution) {
  const int d = spec.param_size();
  if (d > 3) {
    throw std::invalid_argument("grid_oracle_ucb: only d <= 3 is supported");
  }
  if (resolution < 2) {
    throw std::invalid_argument("grid_oracle_ucb: resolution must be at least 2");
  }
  for (const Vector& arm : arms) {
    if (arm.size() != d) {
      throw std::invalid_argument("grid_oracle_ucb: arm dimension mismatch");
    }
  }
  const double S = spec.norm_bound();
  const double spacing = 2.0 * S / (resolution - 1);
  std::vector<double> best(arms.size(), -std::numeric_limits<double>::infinity());

  long total = 1;
  for (int i = 0; i < d; ++i) total *= resolution;
  Vector point(d);
  for (long index = 0; index < total; ++index) {
    long rest = index;
    for (int i = 0; i < d; ++i) {
      point(i) = -S + spacing * static_cast<double>(rest % resolution);
      rest /= resolution;
    }
    if (!contains(spec, point)) {
      continue;
    }
    for (std::size_t a = 0; a < arms.size(); ++a) {
      best[a] = std::max(best[a], arms[a].dot(point));
    }
  }
  return best;
}

double grid_oracle_ucb(const ConfidenceSpec& spec, const Vector& arm, int resolution) {
  return grid_oracle_ucb(spec, std::span<const Vector>(&arm, 1), resolution).front();
}

}  // namespace logbandit
