#include "logbandit/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace logbandit {

namespace {

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("confidence level delta must lie in (0, 1), got " +
                            std::to_string(delta));
  }
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0)) {
    throw std::domain_error(std::string(what) + " must be positive");
  }
}

constexpr double kE = std::numbers::e;

}  // namespace

double radius_logistic(int d, double S, long t, double delta) {
  require_delta(delta);
  require_positive(d, "d");
  require_positive(S, "S");
  require_positive(static_cast<double>(t), "t");
  const double dd = d;
  return 10.0 * dd * std::log(S * static_cast<double>(t) / (4.0 * dd) + kE) +
         2.0 * ((kE - 2.0) + S) * std::log(1.0 / delta);
}

double radius_mnl(int d, int K, double S, long t, double delta) {
  require_delta(delta);
  require_positive(d, "d");
  require_positive(K, "K");
  require_positive(S, "S");
  require_positive(static_cast<double>(t), "t");
  const double dk = static_cast<double>(d) * (K + 1);
  return 5.0 * dk * std::log(kE + S * static_cast<double>(t) / dk) +
         2.0 * ((kE - 2.0) + std::sqrt(6.0 * K) * S) * std::log(1.0 / delta);
}

double gamma_mnl(int d, int K, double S, long t, double delta, double c_gamma) {
  require_delta(delta);
  require_positive(c_gamma, "c_gamma");
  require_positive(S, "S");
  const double dk = static_cast<double>(d) * K;
  const double inner = dk * S * std::log(kE + S * static_cast<double>(t) / dk) +
                       std::sqrt(static_cast<double>(K)) * S * std::log(1.0 / delta);
  return std::sqrt(c_gamma * inner);
}

ConfidenceSpec::ConfidenceSpec(HistoryView history, Vector center, double mle_loss,
                               double radius_sq, double norm_bound)
    : history_(history),
      center_(std::move(center)),
      mle_loss_(mle_loss),
      radius_sq_(radius_sq),
      norm_bound_(norm_bound) {
  if (!(radius_sq >= 0.0)) {
    throw std::invalid_argument("ConfidenceSpec: radius_sq must be nonnegative");
  }
  if (!(norm_bound > 0.0)) {
    throw std::invalid_argument("ConfidenceSpec: norm bound must be positive");
  }
  if (center_.size() != history_.param_size()) {
    throw std::invalid_argument("ConfidenceSpec: center has the wrong dimension");
  }
}

double ConfidenceSpec::loss_gap(const Vector& theta) const {
  return history_.loss(theta) - mle_loss_;
}

double ConfidenceSpec::loss_gap_grad(const Vector& theta, Vector& grad) const {
  return history_.loss_grad(theta, grad) - mle_loss_;
}

ConfidenceSpec ConfidenceSpec::scaled(double factor) const {
  return ConfidenceSpec(history_, center_, mle_loss_, radius_sq_ * factor, norm_bound_);
}

double ConfidenceSpec::gap_tolerance() const { return 1e-7 * std::max(1.0, radius_sq_); }

bool contains(const ConfidenceSpec& spec, const Vector& theta) {
  if (theta.norm() > spec.norm_bound() + spec.norm_tolerance()) {
    return false;
  }
  return spec.loss_gap(theta) <= spec.radius_sq() + spec.gap_tolerance();
}

std::vector<Eigen::Vector2d> boundary_trace_2d(const ConfidenceSpec& spec, int n_rays) {
  if (spec.param_size() != 2) {
    throw std::invalid_argument("boundary_trace_2d: parameter dimension must be 2");
  }
  if (n_rays < 3) {
    throw std::invalid_argument("boundary_trace_2d: need at least 3 rays");
  }
  const Eigen::Vector2d center = spec.center();
  const double radius = spec.norm_bound();
  const double threshold = spec.radius_sq();

  std::vector<Eigen::Vector2d> boundary;
  boundary.reserve(static_cast<std::size_t>(n_rays));
  for (int i = 0; i < n_rays; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / n_rays;
    const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    // Exit distance from the ball: |c + s u| = S.
    const double b = center.dot(dir);
    const double c = center.squaredNorm() - radius * radius;
    const double ball_exit = -b + std::sqrt(std::max(0.0, b * b - c));

    auto inside = [&](double s) {
      const Vector point = center + s * dir;
      return spec.loss_gap(point) <= threshold;
    };
    double hi = ball_exit;
    if (!inside(hi)) {
      double lo = 0.0;
      for (int iter = 0; iter < 50; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
      }
      hi = lo;
    }
    boundary.push_back(center + hi * dir);
  }
  return boundary;
}

bool point_in_convex_polygon(const std::vector<Eigen::Vector2d>& polygon,
                             const Eigen::Vector2d& point, double tol) {
  const std::size_t n = polygon.size();
  if (n < 3) {
    return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = polygon[i];
    const Eigen::Vector2d& b = polygon[(i + 1) % n];
    const Eigen::Vector2d edge = b - a;
    const Eigen::Vector2d rel = point - a;
    // Signed distance to the left of the edge; negative means outside.
    const double cross = edge.x() * rel.y() - edge.y() * rel.x();
    const double len = edge.norm();
    if (len > 0.0 && cross / len < -tol) {
      return false;
    }
  }
  return true;
}

void CoverageLedger::close_run() {
  ++runs_;
  if (current_run_violated()) {
    ++failures_;
  }
  flags_.clear();
}

bool CoverageLedger::current_run_violated() const {
  return std::find(flags_.begin(), flags_.end(), std::uint8_t{0}) != flags_.end();
}

double CoverageLedger::failure_rate() const {
  return runs_ == 0 ? 0.0 : static_cast<double>(failures_) / static_cast<double>(runs_);
}

}  // namespace logbandit
