#pragma once

// Link functions, losses and divergences of the Bernoulli and multinomial
// logit models.
//
// Conventions used across the library:
//  - A logistic parameter is a d-vector.
//  - An MNL parameter is a K x d matrix whose k-th row is the parameter of
//    category k (k = 1..K). Category 0 ("no choice") has its logit fixed to
//    zero and owns no row.
//  - Probability vectors over categories have K + 1 entries, index 0 being
//    the no-choice category.
//
// Every function here is pure.

#include <Eigen/Dense>

namespace logbandit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct LogisticObservation {
  Vector arm;
  int reward = 0;  // 0 or 1
};

struct MnlObservation {
  Vector arm;
  int outcome = 0;  // 0..K, 0 = no choice
};

struct MnlParam {
  Matrix theta;  // K x d
  double bound = 1.0;
};

/// Logistic function, branching on the sign of z so that exp never
/// overflows.
double sigmoid(double z);

/// Derivative of the logistic function, mu(z) * (1 - mu(z)).
double sigmoid_derivative(double z);

/// log(1 + e^z), the Bernoulli log-partition function.
double softplus(double z);

double logistic_loss(const LogisticObservation& obs, const Vector& theta);
Vector logistic_loss_grad(const LogisticObservation& obs, const Vector& theta);

/// KL(Bernoulli(p) || Bernoulli(q)). Throws std::domain_error unless both
/// arguments lie strictly inside (0, 1).
double kl_bernoulli(double p, double q);

/// Bregman divergence of the Bernoulli log-partition m(z) = log(1 + e^z):
///   m(z1) - m(z2) - mu(z2) (z1 - z2).
/// Equals kl_bernoulli(sigmoid(z2), sigmoid(z1)).
double bregman_logpartition(double z1, double z2);

/// log(1 + sum_k e^{z_k}), the categorical log-partition function of K logits.
double log_exp_sum(const Vector& logits);

/// Bregman divergence of log_exp_sum; equals
/// kl_categorical(softmax_from_logits(z2), softmax_from_logits(z1)).
double bregman_log_exp_sum(const Vector& z1, const Vector& z2);

/// (K + 1)-probability vector for K logits with the implicit zero logit of
/// category 0.
Vector softmax_from_logits(const Vector& logits);

Vector softmax_probs(const Vector& arm, const Matrix& theta);

double mnl_loss(const MnlObservation& obs, const Matrix& theta);

/// K x d gradient; row k is (mu_k - y_k) x^T.
Matrix mnl_loss_grad(const MnlObservation& obs, const Matrix& theta);

/// A(x, Theta) = diag(mu) - mu mu^T over the K non-null categories. This is
/// the Hessian of log_exp_sum at the logits Theta x.
Matrix a_matrix(const Vector& arm, const Matrix& theta);

/// Same as a_matrix but taking the logits directly.
Matrix a_matrix_from_logits(const Vector& logits);

/// KL(p || q) for strictly positive normalized vectors of equal size. Throws
/// std::domain_error on zero entries, unnormalized input or size mismatch.
double kl_categorical(const Vector& p, const Vector& q);

/// Constructs Theta with softmax_probs(arm, Theta) = (1 - sum(p), p).
/// Row k is log(p_k / p_0) x / |x|^2, so every row is parallel to the arm.
/// Throws std::domain_error when some p_k <= 0, sum(p) >= 1, or arm = 0.
Matrix softmax_invert(const Vector& p, const Vector& arm);

}  // namespace logbandit
