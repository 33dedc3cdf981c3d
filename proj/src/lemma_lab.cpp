#include "logbandit/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "logbandit/glm.hpp"
#include "logbandit/rng.hpp"

namespace logbandit {

namespace {

std::string describe(const Vector& v) {
  std::ostringstream out;
  out.precision(17);
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v(i);
  out << ']';
  return out.str();
}

std::string describe(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

// Tracks the largest violation and the instance that produced it.
class Worst {
 public:
  explicit Worst(std::string name, double tolerance) {
    report_.name = std::move(name);
    report_.tolerance = tolerance;
    report_.max_violation = -std::numeric_limits<double>::infinity();
  }

  template <class Describe>
  void observe(double violation, Describe&& instance) {
    ++report_.trials;
    if (violation > report_.max_violation || std::isnan(violation)) {
      report_.max_violation = std::isnan(violation) ? std::numeric_limits<double>::infinity()
                                                    : violation;
      report_.worst_instance = instance();
    }
  }

  CheckReport finish(std::string note = {}) {
    report_.pass = report_.max_violation <= report_.tolerance;
    report_.note = std::move(note);
    return report_;
  }

 private:
  CheckReport report_;
};

// KL(Bernoulli(mu(a)) || Bernoulli(mu(b))) with log-probabilities taken from
// the logits, so 1 - mu keeps full relative precision when mu is close to 1.
double kl_from_logits(double a, double b) {
  const double log_p = -softplus(-a);
  const double log_pc = -softplus(a);
  return sigmoid(a) * (log_p + softplus(-b)) + sigmoid(-a) * (log_pc + softplus(b));
}

CounterRng trial_rng(std::uint64_t seed, long trial) {
  return CounterRng(seed, StreamPurpose::kLemma, static_cast<std::uint64_t>(trial));
}

void require_trials(long trials) {
  if (trials < 1) throw std::invalid_argument("lemma check: trials must be at least 1");
}

// Composite Simpson on [0, 1] over an even number of intervals.
template <class F, class T>
T simpson(F&& f, int intervals, T zero) {
  if (intervals % 2 == 1) ++intervals;
  const double h = 1.0 / intervals;
  T sum = zero;
  for (int i = 0; i <= intervals; ++i) {
    const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += weight * f(i * h);
  }
  return sum * (h / 3.0);
}

Matrix random_param(int categories, int dim, double radius, CounterRng& rng) {
  const Vector flat = radius * uniform_in_ball(categories * dim, rng);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), categories, dim);
}

// Vectors of round t for the elliptical presets, K per round.
std::vector<Vector> preset_vectors(SequencePreset preset, int d, int K, int t, const Vector& anchor,
                                   CounterRng& rng) {
  std::vector<Vector> out;
  for (int k = 0; k < K; ++k) {
    switch (preset) {
      case SequencePreset::kRandom:
        out.push_back(uniform_in_ball(d, rng));
        break;
      case SequencePreset::kRepeatedBasis:
        out.push_back(Vector::Unit(d, (t * K + k) % d));
        break;
      case SequencePreset::kNearDuplicate: {
        Vector x = anchor + 1e-6 * uniform_in_ball(d, rng);
        if (x.norm() > 1.0) x /= x.norm();
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

const char* kind_name(EllipticalKind kind) {
  switch (kind) {
    case EllipticalKind::kPotential: return "elliptical_potential";
    case EllipticalKind::kCount: return "elliptical_count";
    case EllipticalKind::kGenPotential: return "elliptical_gen_potential";
    case EllipticalKind::kGenCount: return "elliptical_gen_count";
  }
  return "elliptical";
}

const char* preset_name(SequencePreset preset) {
  switch (preset) {
    case SequencePreset::kRandom: return "random";
    case SequencePreset::kRepeatedBasis: return "repeated_basis";
    case SequencePreset::kNearDuplicate: return "near_duplicate";
  }
  return "?";
}

const char* mds_name(MdsPreset preset) {
  switch (preset) {
    case MdsPreset::kRademacher: return "rademacher";
    case MdsPreset::kCenteredBernoulli: return "centered_bernoulli";
    case MdsPreset::kZero: return "zero";
  }
  return "?";
}

// Worst of several reports under a common name.
CheckReport merge(std::string name, const std::vector<CheckReport>& parts) {
  CheckReport out;
  out.name = std::move(name);
  out.pass = true;
  out.max_violation = -std::numeric_limits<double>::infinity();
  out.tolerance = parts.empty() ? 0.0 : parts.front().tolerance;
  for (const CheckReport& part : parts) {
    out.trials += part.trials;
    out.pass = out.pass && part.pass;
    // Compare margins, since tolerances may differ between parts.
    if (part.max_violation - part.tolerance > out.max_violation - out.tolerance) {
      out.max_violation = part.max_violation;
      out.tolerance = part.tolerance;
      out.worst_instance = part.name + ": " + part.worst_instance;
    }
  }
  return out;
}

}  // namespace

double decomposition_residual_logistic(const Vector& x, const Vector& theta,
                                       const Vector& theta_star, int r) {
  const double z = x.dot(theta);
  const double z_star = x.dot(theta_star);
  const double xi = r - sigmoid(z_star);
  const double lhs = logistic_loss({x, r}, theta_star);
  const double rhs =
      logistic_loss({x, r}, theta) + xi * (z - z_star) - kl_from_logits(z_star, z);
  return lhs - rhs;
}

double decomposition_residual_mnl(const Vector& x, const Matrix& theta, const Matrix& theta_star,
                                  int y) {
  const auto K = theta.rows();
  const Vector p_star = softmax_probs(x, theta_star);
  const Vector p = softmax_probs(x, theta);
  Vector onehot = Vector::Zero(K);
  if (y > 0) onehot(y - 1) = 1.0;
  const Vector xi = onehot - p_star.tail(K);
  const double lhs = mnl_loss({x, y}, theta_star);
  const double rhs =
      mnl_loss({x, y}, theta) - kl_categorical(p_star, p) + xi.dot((theta - theta_star) * x);
  return lhs - rhs;
}

CheckReport check_decomposition_logistic(long trials, std::uint64_t seed, double max_norm) {
  require_trials(trials);
  if (!(max_norm > 0.0) || max_norm > 20.0) {
    throw std::invalid_argument("check_decomposition_logistic: max_norm must lie in (0, 20]");
  }
  Worst worst("decomposition_logistic", max_norm <= 5.0 ? 1e-10 : 1e-8);
  constexpr int d = 3;
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    const Vector x = uniform_in_ball(d, rng);
    const Vector theta = max_norm * uniform_in_ball(d, rng);
    const Vector theta_star = max_norm * uniform_in_ball(d, rng);
    const int r = rng.uniform() < 0.5 ? 1 : 0;
    worst.observe(std::abs(decomposition_residual_logistic(x, theta, theta_star, r)), [&] {
      return "x=" + describe(x) + " theta=" + describe(theta) + " theta_star=" +
             describe(theta_star) + " r=" + std::to_string(r);
    });
  }
  return worst.finish("KL evaluated from the logits");
}

CheckReport check_decomposition_mnl(long trials, std::uint64_t seed, int max_categories,
                                    double max_norm) {
  require_trials(trials);
  if (max_categories < 1) throw std::invalid_argument("check_decomposition_mnl: K must be >= 1");
  Worst worst("decomposition_mnl", 1e-9);
  constexpr int d = 3;
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    const int K = 1 + static_cast<int>(trial % max_categories);
    const Vector x = uniform_in_ball(d, rng);
    const Matrix theta = random_param(K, d, max_norm, rng);
    const Matrix theta_star = random_param(K, d, max_norm, rng);
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(K + 1)));

    worst.observe(std::abs(decomposition_residual_mnl(x, theta, theta_star, y)), [&] {
      return "K=" + std::to_string(K) + " x=" + describe(x) + " y=" + std::to_string(y);
    });
  }
  return worst.finish();
}

double self_concordance_lhs(double z1, double z2, int nodes) {
  return simpson([&](double v) { return (1.0 - v) * sigmoid_derivative(z1 + v * (z2 - z1)); },
                 nodes, 0.0);
}

CheckReport check_self_concordance(long trials, std::uint64_t seed, int nodes) {
  require_trials(trials);
  if (nodes < 1000) {
    throw std::invalid_argument("check_self_concordance: at least 1000 quadrature nodes");
  }
  Worst worst("self_concordance", 1e-8);
  const double sqrt6 = std::sqrt(6.0);
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    // Scalar form with f = sigmoid.
    const double z1 = rng.uniform(-10.0, 10.0);
    const double z2 = rng.uniform(-10.0, 10.0);
    const double lhs = self_concordance_lhs(z1, z2, nodes);
    const double rhs = sigmoid_derivative(z1) / (2.0 + std::abs(z1 - z2));
    worst.observe(rhs - lhs, [&] { return "scalar z1=" + describe(z1) + " z2=" + describe(z2); });

    // Loewner form for the log-exp-sum with K = 3.
    constexpr int K = 3;
    Vector a(K), b(K);
    for (int k = 0; k < K; ++k) {
      a(k) = rng.uniform(-5.0, 5.0);
      b(k) = rng.uniform(-5.0, 5.0);
    }
    const Matrix integral = simpson(
        [&](double v) -> Matrix { return (1.0 - v) * a_matrix_from_logits(a + v * (b - a)); },
        nodes, Matrix(Matrix::Zero(K, K)));
    const Matrix bound = a_matrix_from_logits(a) / (2.0 + sqrt6 * (a - b).norm());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(integral - bound, Eigen::EigenvaluesOnly);
    worst.observe(-eig.eigenvalues()(0),
                  [&] { return "matrix z1=" + describe(a) + " z2=" + describe(b); });
  }
  return worst.finish("Simpson with " + std::to_string(nodes) + " intervals");
}

double elliptical_bound(EllipticalKind kind, int T, int d, int K, double lambda) {
  const double dd = d;
  const double log2 = std::numbers::ln2;
  switch (kind) {
    case EllipticalKind::kPotential: return 2.0 * dd * std::log(1.0 + T / (dd * lambda));
    case EllipticalKind::kCount: return 2.0 * dd / log2 * std::log(1.0 + 1.0 / (lambda * log2));
    case EllipticalKind::kGenPotential:
      return 2.0 * dd * std::log(1.0 + static_cast<double>(K) * T / (dd * lambda));
    case EllipticalKind::kGenCount: return 2.0 * dd / log2 * std::log(1.0 + K / (lambda * log2));
  }
  return 0.0;
}

double elliptical_lhs(EllipticalKind kind, std::span<const std::vector<Vector>> rounds,
                      double lambda) {
  if (rounds.empty()) return 0.0;
  if (!(lambda > 0.0)) throw std::invalid_argument("elliptical_lhs: lambda must be positive");
  const bool count = kind == EllipticalKind::kCount || kind == EllipticalKind::kGenCount;
  int d = 0;
  for (const auto& xs : rounds) {
    if (!xs.empty()) d = static_cast<int>(xs.front().size());
  }
  Matrix inverse = Matrix::Identity(d, d) / lambda;
  double lhs = 0.0;
  for (const auto& xs : rounds) {
    double norm_sq = 0.0;
    for (const Vector& x : xs) norm_sq += x.dot(inverse * x);
    lhs += count ? (norm_sq > 1.0 ? 1.0 : 0.0) : std::min(1.0, norm_sq);
    for (const Vector& x : xs) {
      const Vector u = inverse * x;
      inverse -= (u * u.transpose()) / (1.0 + x.dot(u));
    }
  }
  return lhs;
}

CheckReport check_elliptical(EllipticalKind kind, int T, int d, int K, double lambda,
                             SequencePreset preset, long trials, std::uint64_t seed) {
  require_trials(trials);
  if (T < 1 || d < 1 || K < 1 || !(lambda > 0.0)) {
    throw std::invalid_argument("check_elliptical: need T, d, K >= 1 and lambda > 0");
  }
  const bool generalized = kind == EllipticalKind::kGenPotential || kind == EllipticalKind::kGenCount;
  const int per_round = generalized ? K : 1;
  const double bound = elliptical_bound(kind, T, d, per_round, lambda);

  Worst worst(std::string(kind_name(kind)) + "/" + preset_name(preset), 0.0);
  std::vector<std::vector<Vector>> rounds(static_cast<std::size_t>(T));
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    const Vector anchor = uniform_on_sphere(d, rng);
    for (int t = 0; t < T; ++t) {
      rounds[static_cast<std::size_t>(t)] = preset_vectors(preset, d, per_round, t, anchor, rng);
    }
    const double lhs = elliptical_lhs(kind, rounds, lambda);
    worst.observe(lhs - bound, [&] {
      return "T=" + std::to_string(T) + " d=" + std::to_string(d) + " K=" +
             std::to_string(per_round) + " lambda=" + describe(lambda) + " lhs=" + describe(lhs) +
             " bound=" + describe(bound);
    });
  }
  return worst.finish();
}

CheckReport check_freedman(long trials, int T, double eta, double R, double delta, MdsPreset preset,
                           std::uint64_t seed) {
  require_trials(trials);
  if (!(R > 0.0)) throw std::domain_error("check_freedman: R must be positive");
  if (!(eta > 0.0 && eta <= 1.0 / R)) {
    throw std::domain_error("check_freedman: eta must lie in (0, 1/R]");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("check_freedman: delta must lie in (0, 1)");
  if (T < 1) throw std::invalid_argument("check_freedman: T must be positive");

  const double band = delta + 3.0 * std::sqrt(delta / static_cast<double>(trials));
  const double offset = std::log(1.0 / delta) / eta;
  const double slope = (std::numbers::e - 2.0) * eta;
  long failures = 0;
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    // Centered Bernoulli: X = R (B - p) with p drawn once per trajectory.
    const double p = preset == MdsPreset::kCenteredBernoulli ? rng.uniform(0.05, 0.95) : 0.5;
    double sum = 0.0;
    double variance = 0.0;
    for (int t = 0; t < T; ++t) {
      double x = 0.0;
      double second_moment = 0.0;
      switch (preset) {
        case MdsPreset::kRademacher:
          x = rng.uniform() < 0.5 ? R : -R;
          second_moment = R * R;
          break;
        case MdsPreset::kCenteredBernoulli:
          x = R * ((rng.uniform() < p ? 1.0 : 0.0) - p);
          second_moment = R * R * p * (1.0 - p);
          break;
        case MdsPreset::kZero:
          break;
      }
      sum += x;
      variance += second_moment;
      if (sum > slope * variance + offset) {
        ++failures;
        break;
      }
    }
  }
  CheckReport report;
  report.name = std::string("freedman/") + mds_name(preset);
  report.trials = trials;
  report.max_violation = static_cast<double>(failures) / static_cast<double>(trials);
  report.tolerance = band;
  report.pass = report.max_violation <= report.tolerance;
  report.worst_instance = "T=" + std::to_string(T) + " eta=" + describe(eta) + " R=" + describe(R) +
                          " delta=" + describe(delta) + " failures=" + std::to_string(failures);
  report.note = "violation is the empirical failure rate; tolerance is delta + 3 sqrt(delta/trials)";
  return report;
}

CheckReport check_poly_inequality(long trials, std::uint64_t seed) {
  require_trials(trials);
  Worst worst("poly_inequality", 0.0);
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    // Exact zeros and boundary points are part of the sample.
    const double b = trial % 7 == 0 ? 0.0 : rng.uniform(0.0, 10.0);
    const double c = trial % 11 == 0 ? 0.0 : rng.uniform(0.0, 10.0);
    const double root = 0.5 * (b + std::sqrt(b * b + 4.0 * c));
    const double x = trial % 3 == 0 ? root : root * rng.uniform();
    worst.observe(x * x - 2.0 * (b * b + c), [&] {
      return "b=" + describe(b) + " c=" + describe(c) + " x=" + describe(x);
    });
  }
  return worst.finish();
}

CheckReport check_kl_bregman_logistic(long trials, std::uint64_t seed) {
  require_trials(trials);
  Worst worst("kl_bregman_logistic", 1e-11);
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    const double z1 = rng.uniform(-8.0, 8.0);
    const double z2 = rng.uniform(-8.0, 8.0);
    const double residual = kl_bernoulli(sigmoid(z1), sigmoid(z2)) - bregman_logpartition(z2, z1);
    worst.observe(std::abs(residual), [&] { return "z1=" + describe(z1) + " z2=" + describe(z2); });
  }
  return worst.finish();
}

CheckReport check_kl_bregman_mnl(long trials, std::uint64_t seed) {
  require_trials(trials);
  Worst worst("kl_bregman_mnl", 1e-10);
  for (long trial = 0; trial < trials; ++trial) {
    CounterRng rng = trial_rng(seed, trial);
    const int K = 1 + static_cast<int>(trial % 5);
    Vector z1(K), z2(K);
    for (int k = 0; k < K; ++k) {
      z1(k) = rng.uniform(-6.0, 6.0);
      z2(k) = rng.uniform(-6.0, 6.0);
    }
    const double residual = kl_categorical(softmax_from_logits(z1), softmax_from_logits(z2)) -
                            bregman_log_exp_sum(z2, z1);
    worst.observe(std::abs(residual), [&] { return "z1=" + describe(z1) + " z2=" + describe(z2); });
  }
  return worst.finish();
}

std::vector<std::string> check_names() {
  return {"decomposition_logistic", "decomposition_mnl", "self_concordance", "elliptical",
          "freedman", "poly_inequality", "kl_bregman_logistic", "kl_bregman_mnl"};
}

std::vector<CheckReport> run_named_check(const std::string& name, long trials, std::uint64_t seed) {
  require_trials(trials);
  if (name == "decomposition_logistic") {
    return {check_decomposition_logistic(trials, seed, 5.0),
            check_decomposition_logistic(trials, seed + 1, 20.0)};
  }
  if (name == "decomposition_mnl") return {check_decomposition_mnl(trials, seed)};
  if (name == "self_concordance") return {check_self_concordance(std::max(1L, trials / 10), seed)};
  if (name == "poly_inequality") return {check_poly_inequality(trials, seed)};
  if (name == "kl_bregman_logistic") return {check_kl_bregman_logistic(std::max(1L, trials / 10), seed)};
  if (name == "kl_bregman_mnl") return {check_kl_bregman_mnl(std::max(1L, trials / 10), seed)};
  if (name == "elliptical") {
    // Sequences per (d, K, lambda, preset) cell.
    const long sequences = std::clamp(trials / 1000, 1L, 20L);
    std::vector<CheckReport> out;
    for (EllipticalKind kind : {EllipticalKind::kPotential, EllipticalKind::kCount,
                                EllipticalKind::kGenPotential, EllipticalKind::kGenCount}) {
      const bool generalized =
          kind == EllipticalKind::kGenPotential || kind == EllipticalKind::kGenCount;
      std::vector<CheckReport> parts;
      for (SequencePreset preset : {SequencePreset::kRandom, SequencePreset::kRepeatedBasis,
                                    SequencePreset::kNearDuplicate}) {
        for (int d : {1, 2, 5}) {
          for (int K : generalized ? std::vector<int>{1, 2, 4} : std::vector<int>{1}) {
            for (double lambda : {0.1, 0.5, 1.0, 4.0}) {
              parts.push_back(check_elliptical(kind, 500, d, K, lambda, preset, sequences, seed));
            }
          }
        }
      }
      out.push_back(merge(kind_name(kind), parts));
    }
    return out;
  }
  if (name == "freedman") {
    return {check_freedman(trials, 100, 1.0, 1.0, 0.05, MdsPreset::kRademacher, seed),
            check_freedman(trials, 100, 1.0, 1.0, 0.05, MdsPreset::kCenteredBernoulli, seed),
            check_freedman(trials, 100, 1.0, 1.0, 0.05, MdsPreset::kZero, seed),
            check_freedman(trials, 100, 0.5, 1.0, 0.5, MdsPreset::kRademacher, seed + 1)};
  }
  throw std::invalid_argument("unknown check '" + name + "'");
}

}  // namespace logbandit
