#include "logbandit/history.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace logbandit {

History::History(int dim, int categories) : dim_(dim), categories_(categories) {
  if (dim < 1 || categories < 1) {
    throw std::invalid_argument("History: dim and categories must be positive");
  }
  arms_.resize(dim, 64);
  cum_energy_.push_back(0.0);
}

void History::append(const Vector& arm, int outcome) {
  if (arm.size() != dim_) {
    throw std::invalid_argument("History::append: arm has dimension " +
                                std::to_string(arm.size()) + ", expected " +
                                std::to_string(dim_));
  }
  if (!arm.allFinite() || arm.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument("History::append: arm must be finite with norm <= 1");
  }
  if (outcome < 0 || outcome > categories_) {
    throw std::invalid_argument("History::append: outcome " + std::to_string(outcome) +
                                " outside 0.." + std::to_string(categories_));
  }
  const auto n = static_cast<Eigen::Index>(outcomes_.size());
  if (n == arms_.cols()) {
    arms_.conservativeResize(Eigen::NoChange, 2 * arms_.cols());
  }
  arms_.col(n) = arm;
  outcomes_.push_back(outcome);
  cum_energy_.push_back(cum_energy_.back() + arm.squaredNorm());
}

Eigen::Ref<const Vector> History::arm(std::size_t i) const {
  return arms_.col(static_cast<Eigen::Index>(i));
}

double History::arm_energy(std::size_t n) const { return cum_energy_[std::min(n, size())]; }

HistoryView History::view() const { return HistoryView(this, size()); }

HistoryView History::prefix(std::size_t n) const {
  if (n > size()) {
    throw std::out_of_range("History::prefix: longer than the history");
  }
  return HistoryView(this, n);
}

double HistoryView::loss(const Vector& theta) const {
  if (history_ == nullptr || size_ == 0) {
    return 0.0;
  }
  return categories() == 1 ? logistic(theta, nullptr) : multinomial(theta, nullptr);
}

double HistoryView::loss_grad(const Vector& theta, Vector& grad) const {
  if (history_ == nullptr || size_ == 0) {
    grad = Vector::Zero(theta.size());
    return 0.0;
  }
  return categories() == 1 ? logistic(theta, &grad) : multinomial(theta, &grad);
}

Matrix HistoryView::loss_hessian(const Vector& theta) const {
  if (categories() != 1) {
    throw std::logic_error("HistoryView::loss_hessian: logistic histories only");
  }
  if (theta.size() != dim()) {
    throw std::invalid_argument("HistoryView: parameter size mismatch");
  }
  const auto n = static_cast<Eigen::Index>(size_);
  const auto arms = history_->arms_.leftCols(n);
  const Eigen::ArrayXd z = (arms.transpose() * theta).array();
  const Eigen::ArrayXd e = (-z.abs()).exp();
  const Eigen::ArrayXd weight = e / (1.0 + e).square();
  return arms * weight.matrix().asDiagonal() * arms.transpose();
}

double HistoryView::logistic(const Vector& theta, Vector* grad) const {
  if (theta.size() != dim()) {
    throw std::invalid_argument("HistoryView: parameter size mismatch");
  }
  // Blocks keep the temporaries on the stack and in cache.
  constexpr Eigen::Index kBlock = 256;
  using BlockArray = Eigen::Array<double, Eigen::Dynamic, 1, 0, kBlock, 1>;
  const auto n = static_cast<Eigen::Index>(size_);
  double value = 0.0;
  if (grad != nullptr) grad->setZero(theta.size());
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index m = std::min(kBlock, n - start);
    const auto arms = history_->arms_.middleCols(start, m);
    const BlockArray z = (arms.transpose() * theta).array();
    const BlockArray reward =
        Eigen::Map<const Eigen::ArrayXi>(history_->outcomes_.data() + start, m).cast<double>();

    // loss_s = softplus(z) when r = 0 and softplus(-z) when r = 1.
    const BlockArray e = (-z.abs()).exp();
    value += (((1.0 - 2.0 * reward) * z).max(0.0) + e.log1p()).sum();
    if (grad != nullptr) {
      const BlockArray mu = (z >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
      grad->noalias() += arms * (mu - reward).matrix();
    }
  }
  return value;
}

double HistoryView::multinomial(const Vector& theta, Vector* grad) const {
  const int k = categories();
  const int d = dim();
  if (theta.size() != k * d) {
    throw std::invalid_argument("HistoryView: parameter size mismatch");
  }
  const auto n = static_cast<Eigen::Index>(size_);
  const auto arms = history_->arms_.leftCols(n);
  const ParamMap param = as_param_matrix(theta, k, d);
  Matrix logits = param * arms;  // K x n

  double value = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    auto column = logits.col(s);
    const int y = history_->outcomes_[static_cast<std::size_t>(s)];
    const double chosen = y == 0 ? 0.0 : column(y - 1);
    const double shift = std::max(0.0, column.maxCoeff());
    column.array() = (column.array() - shift).exp();
    const double total = std::exp(-shift) + column.sum();
    value += shift + std::log(total) - chosen;
    if (grad != nullptr) {
      // Column now holds the category probabilities minus the one-hot target.
      column /= total;
      if (y > 0) {
        column(y - 1) -= 1.0;
      }
    }
  }
  if (grad != nullptr) {
    const Matrix g = logits * arms.transpose();  // K x d
    *grad = flatten_param(g);
  }
  return value;
}

Vector flatten_param(const Matrix& theta) {
  Vector flat(theta.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), theta.rows(), theta.cols()) = theta;
  return flat;
}

}  // namespace logbandit
