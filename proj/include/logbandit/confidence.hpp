#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "logbandit/glm.hpp"
#include "logbandit/history.hpp"

namespace logbandit {

/// beta_t(delta)^2 of the logistic loss-based confidence set:
///   10 d log(S t / (4 d) + e) + 2 ((e - 2) + S) log(1 / delta).
/// Throws std::domain_error unless delta lies in (0, 1).
double radius_logistic(int d, double S, long t, double delta);

/// beta_t(delta)^2 of the MNL loss-based confidence set, K' = K + 1:
///   5 d K' log(e + S t / (d K')) + 2 ((e - 2) + sqrt(6 K) S) log(1 / delta).
double radius_mnl(int d, int K, double S, long t, double delta);

/// gamma_t(delta) = sqrt(c_gamma (d K S log(e + S t / (d K)) + sqrt(K) S log(1/delta))),
/// the Hessian-distance radius behind the MNL-UCB+ bonus. c_gamma stands in for
/// the unspecified universal constant and must be positive.
double gamma_mnl(int d, int K, double S, long t, double delta, double c_gamma = 1.0);

/// {theta : |theta| <= S, L_t(theta) - L_t(theta_hat) <= radius_sq}.
///
/// Holds a view of the history it was built from; the view stays valid while
/// the owning History is only appended to.
class ConfidenceSpec {
 public:
  ConfidenceSpec(HistoryView history, Vector center, double mle_loss, double radius_sq,
                 double norm_bound);

  const HistoryView& history() const { return history_; }
  const Vector& center() const { return center_; }
  double mle_loss() const { return mle_loss_; }
  double radius_sq() const { return radius_sq_; }
  double norm_bound() const { return norm_bound_; }
  int param_size() const { return history_.param_size(); }

  double loss_gap(const Vector& theta) const;
  double loss_gap_grad(const Vector& theta, Vector& grad) const;

  /// Same set with the radius multiplied by `factor`.
  ConfidenceSpec scaled(double factor) const;

  double norm_tolerance() const { return 1e-9 * norm_bound_; }
  double gap_tolerance() const;

 private:
  HistoryView history_;
  Vector center_;
  double mle_loss_;
  double radius_sq_;
  double norm_bound_;
};

/// Membership with slack for the MLE solver: |theta| <= S + 1e-9 S and
/// gap <= radius_sq + 1e-7 max(1, radius_sq).
bool contains(const ConfidenceSpec& spec, const Vector& theta);

/// Polygonal boundary of a two-dimensional set. Rays leave the center at
/// angles 2 pi i / n_rays; along each one, 50 bisection steps locate where the
/// loss constraint or the norm ball binds first. Throws std::invalid_argument
/// when d != 2 or n_rays < 3.
std::vector<Eigen::Vector2d> boundary_trace_2d(const ConfidenceSpec& spec, int n_rays);

/// True when `point` lies inside (or on) a convex polygon given in
/// counter-clockwise order, up to `tol` outside any edge.
bool point_in_convex_polygon(const std::vector<Eigen::Vector2d>& polygon,
                             const Eigen::Vector2d& point, double tol = 1e-9);

/// Per-run membership flags ("theta_star in C_t") and the number of runs with
/// at least one violation.
class CoverageLedger {
 public:
  void record(bool member) { flags_.push_back(member ? 1 : 0); }

  /// Closes the current run and clears its flags.
  void close_run();

  const std::vector<std::uint8_t>& flags() const { return flags_; }
  bool current_run_violated() const;
  std::size_t runs() const { return runs_; }
  std::size_t failures() const { return failures_; }
  double failure_rate() const;

 private:
  std::vector<std::uint8_t> flags_;
  std::size_t runs_ = 0;
  std::size_t failures_ = 0;
};

}  // namespace logbandit
