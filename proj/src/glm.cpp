#include "logbandit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace logbandit {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_derivative(double z) {
  // mu(z)(1 - mu(z)) = e^{-|z|} / (1 + e^{-|z|})^2, symmetric in z.
  const double e = std::exp(-std::abs(z));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double logistic_loss(const LogisticObservation& obs, const Vector& theta) {
  const double z = obs.arm.dot(theta);
  // -log mu(z) = softplus(-z), -log(1 - mu(z)) = softplus(z)
  return obs.reward == 1 ? softplus(-z) : softplus(z);
}

Vector logistic_loss_grad(const LogisticObservation& obs, const Vector& theta) {
  const double z = obs.arm.dot(theta);
  return (sigmoid(z) - static_cast<double>(obs.reward)) * obs.arm;
}

namespace {

bool strictly_interior(double p) { return p > 0.0 && p < 1.0; }

}  // namespace

double kl_bernoulli(double p, double q) {
  if (!strictly_interior(p) || !strictly_interior(q)) {
    throw std::domain_error("kl_bernoulli: arguments must lie in (0, 1), got p=" +
                            std::to_string(p) + " q=" + std::to_string(q));
  }
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

double bregman_logpartition(double z1, double z2) {
  return softplus(z1) - softplus(z2) - sigmoid(z2) * (z1 - z2);
}

double log_exp_sum(const Vector& logits) {
  const double shift = logits.size() > 0 ? std::max(0.0, logits.maxCoeff()) : 0.0;
  const double total = std::exp(-shift) + (logits.array() - shift).exp().sum();
  return shift + std::log(total);
}

Vector softmax_from_logits(const Vector& logits) {
  const Eigen::Index k = logits.size();
  const double shift = k > 0 ? std::max(0.0, logits.maxCoeff()) : 0.0;
  Vector probs(k + 1);
  probs(0) = std::exp(-shift);
  probs.tail(k) = (logits.array() - shift).exp().matrix();
  probs /= probs.sum();
  return probs;
}

double bregman_log_exp_sum(const Vector& z1, const Vector& z2) {
  if (z1.size() != z2.size()) {
    throw std::invalid_argument("bregman_log_exp_sum: logit sizes differ");
  }
  const Vector mu2 = softmax_from_logits(z2).tail(z2.size());
  return log_exp_sum(z1) - log_exp_sum(z2) - mu2.dot(z1 - z2);
}

Vector softmax_probs(const Vector& arm, const Matrix& theta) {
  return softmax_from_logits(theta * arm);
}

double mnl_loss(const MnlObservation& obs, const Matrix& theta) {
  const Vector logits = theta * obs.arm;
  const double chosen = obs.outcome == 0 ? 0.0 : logits(obs.outcome - 1);
  return log_exp_sum(logits) - chosen;
}

Matrix mnl_loss_grad(const MnlObservation& obs, const Matrix& theta) {
  Vector residual = softmax_probs(obs.arm, theta).tail(theta.rows());
  if (obs.outcome > 0) {
    residual(obs.outcome - 1) -= 1.0;
  }
  return residual * obs.arm.transpose();
}

Matrix a_matrix_from_logits(const Vector& logits) {
  // Binary case: mu (1 - mu) without the cancellation in mu - mu^2.
  if (logits.size() == 1) return Matrix::Constant(1, 1, sigmoid_derivative(logits(0)));
  const Vector mu = softmax_from_logits(logits).tail(logits.size());
  Matrix a = -mu * mu.transpose();
  a.diagonal() += mu;
  return a;
}

Matrix a_matrix(const Vector& arm, const Matrix& theta) {
  return a_matrix_from_logits(theta * arm);
}

double kl_categorical(const Vector& p, const Vector& q) {
  if (p.size() != q.size() || p.size() == 0) {
    throw std::domain_error("kl_categorical: size mismatch");
  }
  constexpr double kSumTol = 1e-9;
  if ((p.array() <= 0.0).any() || (q.array() <= 0.0).any()) {
    throw std::domain_error("kl_categorical: entries must be strictly positive");
  }
  if (std::abs(p.sum() - 1.0) > kSumTol || std::abs(q.sum() - 1.0) > kSumTol) {
    throw std::domain_error("kl_categorical: vectors must sum to one");
  }
  return (p.array() * (p.array() / q.array()).log()).sum();
}

Matrix softmax_invert(const Vector& p, const Vector& arm) {
  if ((p.array() <= 0.0).any()) {
    throw std::domain_error("softmax_invert: probabilities must be positive");
  }
  const double p0 = 1.0 - p.sum();
  if (!(p0 > 0.0)) {
    throw std::domain_error("softmax_invert: category probabilities must sum below one");
  }
  const double norm_sq = arm.squaredNorm();
  if (!(norm_sq > 0.0)) {
    throw std::domain_error("softmax_invert: arm must be nonzero");
  }
  // alpha_k = p_k / p_0 solves the linear system C_K alpha = p; each row then
  // needs <x, theta_k> = log alpha_k.
  const Vector log_alpha = (p.array() / p0).log().matrix();
  return log_alpha * (arm / norm_sq).transpose();
}

}  // namespace logbandit
