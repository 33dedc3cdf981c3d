#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "logbandit/glm.hpp"

namespace logbandit {

/// Outcome of one numerical check. max_violation is signed: positive means
/// the inequality failed or the identity left a residual of that size.
struct CheckReport {
  std::string name;
  long trials = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;  // max_violation <= tolerance
  std::string worst_instance;  // the instance attaining max_violation
  std::string note;
};

/// Signed residual lhs - rhs of the logistic decomposition below for one
/// instance; the KL term is evaluated from the logits.
double decomposition_residual_logistic(const Vector& x, const Vector& theta,
                                       const Vector& theta_star, int r);

/// Same for the multinomial decomposition, y in 0..K.
double decomposition_residual_mnl(const Vector& x, const Matrix& theta, const Matrix& theta_star,
                                  int y);

/// int_0^1 (1 - v) sigmoid'(z1 + v (z2 - z1)) dv by composite Simpson.
double self_concordance_lhs(double z1, double z2, int nodes = 1000);

/// l(theta_star) = l(theta) + xi <x, theta - theta_star> - KL(mu(theta_star), mu(theta))
/// with xi = r - mu(<x, theta_star>), on random x in the unit ball (d = 3),
/// theta, theta_star with norm <= max_norm and r in {0, 1}. Tolerance 1e-10 for
/// max_norm <= 5, 1e-8 up to 20; larger norms throw std::invalid_argument.
CheckReport check_decomposition_logistic(long trials, std::uint64_t seed, double max_norm = 5.0);

/// Multinomial version with xi = y - mu(x, Theta_star) over the non-null
/// categories and Frobenius norms <= max_norm; K cycles through 1..max_categories.
/// Tolerance 1e-9.
CheckReport check_decomposition_mnl(long trials, std::uint64_t seed, int max_categories = 5,
                                    double max_norm = 5.0);

/// int_0^1 (1 - v) f'(z1 + v (z2 - z1)) dv >= f'(z1) / (2 + |z1 - z2|) for
/// f = sigmoid on z in [-10, 10]^2, and the matrix form
/// int_0^1 (1 - v) grad^2 m(z1 + v (z2 - z1)) dv >= grad^2 m(z1) / (2 + sqrt(6) |z1 - z2|)
/// in the Loewner order for the log-exp-sum m with K = 3. Integrals by
/// composite Simpson over `nodes` intervals (at least 1000, else
/// std::invalid_argument). Tolerance 1e-8.
CheckReport check_self_concordance(long trials, std::uint64_t seed, int nodes = 1000);

enum class EllipticalKind { kPotential, kCount, kGenPotential, kGenCount };
enum class SequencePreset { kRandom, kRepeatedBasis, kNearDuplicate };

/// Closed-form right-hand side of the lemma.
double elliptical_bound(EllipticalKind kind, int T, int d, int K, double lambda);

/// Exact left-hand side along a sequence, V_1 = lambda I and each round's
/// vectors added after it is scored: the sum of min(1, sum_k |x|^2_{V^-1})
/// for the potential kinds, the number of rounds with that sum above 1 for
/// the count kinds.
double elliptical_lhs(EllipticalKind kind, std::span<const std::vector<Vector>> rounds,
                      double lambda);

/// Exact left-hand side of the (generalized) elliptical potential lemma or its
/// count version against the closed-form bound, maintaining V_t and its
/// inverse. The plain kinds use one vector per round (K is ignored).
CheckReport check_elliptical(EllipticalKind kind, int T, int d, int K, double lambda,
                             SequencePreset preset, long trials, std::uint64_t seed);

enum class MdsPreset { kRademacher, kCenteredBernoulli, kZero };

/// Share of simulated trajectories for which
///   sum_s X_s <= (e - 2) eta sum_s E[X_s^2] + log(1/delta) / eta
/// fails at some t <= T. Passes when the share is at most
/// delta + 3 sqrt(delta / trials). Throws std::domain_error unless
/// eta lies in (0, 1/R].
CheckReport check_freedman(long trials, int T, double eta, double R, double delta, MdsPreset preset,
                           std::uint64_t seed);

/// x^2 <= b x + c implies x^2 <= 2 (b^2 + c), for b, c >= 0 and x up to the
/// largest root of the premise.
CheckReport check_poly_inequality(long trials, std::uint64_t seed);

/// KL(mu(z1), mu(z2)) = bregman_logpartition(z2, z1). Tolerance 1e-11.
CheckReport check_kl_bregman_logistic(long trials, std::uint64_t seed);

/// KL(softmax(z1), softmax(z2)) = bregman_log_exp_sum(z2, z1). Tolerance 1e-10.
CheckReport check_kl_bregman_mnl(long trials, std::uint64_t seed);

/// Names accepted by run_named_check, in the order "all" runs them.
std::vector<std::string> check_names();

/// Runs a named check with the trial count scaled from `trials` where it makes
/// sense. Throws std::invalid_argument for an unknown name.
std::vector<CheckReport> run_named_check(const std::string& name, long trials, std::uint64_t seed);

}  // namespace logbandit
