#pragma once

#include <cstddef>
#include <vector>

#include "logbandit/glm.hpp"

namespace logbandit {

class HistoryView;

/// Append-only record of (arm, outcome) pairs for one model.
///
/// `categories` is K: 1 for the logistic model (outcome = reward in {0,1}),
/// K >= 1 for the MNL model (outcome in 0..K). Parameters are passed around
/// flattened: a logistic theta is the d-vector itself and an MNL Theta is
/// stored row by row, i.e. vec(Theta^T) = (theta^(1); ...; theta^(K)).
class History {
 public:
  History(int dim, int categories);

  /// Validates |arm| <= 1 + 1e-12, the dimension, and 0 <= outcome <= K.
  /// Throws std::invalid_argument otherwise.
  void append(const Vector& arm, int outcome);

  std::size_t size() const { return outcomes_.size(); }
  bool empty() const { return outcomes_.empty(); }
  int dim() const { return dim_; }
  int categories() const { return categories_; }
  int param_size() const { return dim_ * categories_; }

  Eigen::Ref<const Vector> arm(std::size_t i) const;
  int outcome(std::size_t i) const { return outcomes_[i]; }

  /// Sum of squared arm norms over the first n observations; an upper bound
  /// on the curvature scale of the cumulative loss.
  double arm_energy(std::size_t n) const;

  HistoryView view() const;
  HistoryView prefix(std::size_t n) const;

 private:
  friend class HistoryView;

  int dim_;
  int categories_;
  Matrix arms_;                   // dim x capacity, column per observation
  std::vector<int> outcomes_;
  std::vector<double> cum_energy_;  // prefix sums of |x_s|^2
};

/// Read-only prefix of a History; evaluates the cumulative loss
/// L(theta) = sum_{s < n} loss_s(theta). The History must outlive the view
/// and only be appended to while the view is in use.
class HistoryView {
 public:
  HistoryView() = default;
  HistoryView(const History* history, std::size_t n) : history_(history), size_(n) {}

  std::size_t size() const { return size_; }
  int dim() const { return history_->dim(); }
  int categories() const { return history_->categories(); }
  int param_size() const { return history_->param_size(); }
  const History& history() const { return *history_; }

  double loss(const Vector& theta) const;
  double loss_grad(const Vector& theta, Vector& grad) const;

  /// sum_s mu_dot(<x_s, theta>) x_s x_s^T. Logistic histories only; throws
  /// std::logic_error for MNL.
  Matrix loss_hessian(const Vector& theta) const;

 private:
  double logistic(const Vector& theta, Vector* grad) const;
  double multinomial(const Vector& theta, Vector* grad) const;

  const History* history_ = nullptr;
  std::size_t size_ = 0;
};

/// Row-major K x d view of a flattened MNL parameter.
using ParamMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>;

inline ParamMap as_param_matrix(const Vector& flat, int categories, int dim) {
  return ParamMap(flat.data(), categories, dim);
}

/// Flattens a K x d matrix row by row.
Vector flatten_param(const Matrix& theta);

}  // namespace logbandit
