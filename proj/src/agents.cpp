#include "logbandit/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "logbandit/glm.hpp"

namespace logbandit {

namespace {

std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void require_arms(std::span<const Vector> arms, int dim) {
  if (arms.empty()) throw std::invalid_argument("choose: empty arm set");
  for (const Vector& x : arms) {
    if (x.size() != dim) throw std::invalid_argument("choose: arm dimension mismatch");
  }
}

}  // namespace

Agent::Agent(int dim, int categories, PolicyParams params)
    : state_{History(dim, categories), SolveReport{}, 1, std::move(params)} {
  if (!(state_.params.S > 0.0)) throw std::invalid_argument("agent: S must be positive");
  if (!(state_.params.delta > 0.0 && state_.params.delta < 1.0)) {
    throw std::domain_error("agent: delta must lie in (0, 1)");
  }
  state_.params.solver.validate();
  state_.mle = mle_ball(state_.history.view(), state_.params.S, state_.params.solver);
}

void Agent::update(const Vector& arm, int outcome) {
  state_.history.append(arm, outcome);
  SolveReport report = mle_ball(state_.history.view(), state_.params.S, state_.params.solver,
                                state_.mle.solution);
  if (!report.converged) {
    throw SolverError("MLE did not converge at round " + std::to_string(state_.t + 1) +
                      " (residual " + std::to_string(report.kkt_residual) + ")");
  }
  state_.mle = std::move(report);
  ++state_.t;
  on_update(arm);
}

double Agent::theory_radius_sq() const {
  const auto& p = state_.params;
  if (categories() == 1) {
    return radius_logistic(dim(), p.S, state_.t, p.delta);
  }
  return radius_mnl(dim(), categories(), p.S, state_.t, p.delta);
}

ConfidenceSpec Agent::confidence_set() const {
  return ConfidenceSpec(state_.history.view(), state_.mle.solution, state_.mle.objective,
                        theory_radius_sq(), state_.params.S);
}

OfuLogPlus::OfuLogPlus(int dim, PolicyParams params) : Agent(dim, 1, std::move(params)) {
  if (!(state_.params.radius_scale > 0.0)) {
    throw std::invalid_argument("OFULog+: radius scale must be positive");
  }
}

std::string_view OfuLogPlus::name() const {
  return state_.params.radius_scale == 1.0 ? "ofulogplus" : "radius_scaled";
}

ConfidenceSpec OfuLogPlus::confidence_set() const {
  return Agent::confidence_set().scaled(state_.params.radius_scale);
}

std::size_t OfuLogPlus::choose(std::span<const Vector> arms) {
  require_arms(arms, dim());
  const ConfidenceSpec spec = confidence_set();
  decision_ = DecisionRecord{};
  decision_.t = state_.t;
  decision_.radius_sq = spec.radius_sq();
  decision_.scores.assign(arms.size(), std::numeric_limits<double>::quiet_NaN());
  decision_.upper_bounds = state_.params.screen_arms
                               ? ucb_upper_bounds(spec, arms)
                               : std::vector<double>(arms.size(),
                                                     std::numeric_limits<double>::infinity());

  // Solve in order of decreasing bound; once a bound falls below the best
  // exact value, no later arm can win.
  std::vector<std::size_t> order(arms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return decision_.upper_bounds[a] > decision_.upper_bounds[b];
  });
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = arms.size();
  for (std::size_t i : order) {
    if (decision_.upper_bounds[i] < best) break;
    const UcbResult ucb = ucb_max(spec, arms[i], state_.params.solver);
    if (!ucb.converged) {
      throw SolverError("UCB solve did not converge at round " + std::to_string(state_.t) +
                        ", arm " + std::to_string(i) + " (stages " +
                        std::to_string(ucb.stages) + ", bounds " + std::to_string(ucb.value) +
                        " .. " + std::to_string(ucb.upper_bound) + ")");
    }
    decision_.scores[i] = ucb.value;
    decision_.solver_iterations += ucb.iterations;
    if (ucb.value > best || (ucb.value == best && i < best_index)) {
      best = ucb.value;
      best_index = i;
    }
  }
  decision_.arm = best_index;
  return decision_.arm;
}

EpsGreedy::EpsGreedy(int dim, PolicyParams params)
    : Agent(dim, 1, std::move(params)), rng_(state_.params.seed, StreamPurpose::kAgent) {
  if (!(state_.params.eps >= 0.0 && state_.params.eps <= 1.0)) {
    throw std::invalid_argument("eps_greedy: eps must lie in [0, 1]");
  }
}

std::size_t EpsGreedy::choose(std::span<const Vector> arms) {
  require_arms(arms, dim());
  rng_.seek(static_cast<std::uint64_t>(state_.t));
  decision_ = DecisionRecord{};
  decision_.t = state_.t;
  for (const Vector& x : arms) decision_.scores.push_back(x.dot(state_.mle.solution));
  if (rng_.uniform() < state_.params.eps) {
    decision_.arm = static_cast<std::size_t>(rng_.below(arms.size()));
  } else {
    decision_.arm = argmax_first(decision_.scores);
  }
  return decision_.arm;
}

UniformAgent::UniformAgent(int dim, int categories, PolicyParams params)
    : Agent(dim, categories, std::move(params)), rng_(state_.params.seed, StreamPurpose::kAgent) {}

std::size_t UniformAgent::choose(std::span<const Vector> arms) {
  require_arms(arms, dim());
  rng_.seek(static_cast<std::uint64_t>(state_.t));
  decision_ = DecisionRecord{};
  decision_.t = state_.t;
  decision_.arm = static_cast<std::size_t>(rng_.below(arms.size()));
  return decision_.arm;
}

MnlDesignState::MnlDesignState(int dim, int categories, double S, double kappa)
    : kappa_(kappa), lambda_(categories / (4.0 * S * S)) {
  design_ = regularizer() * Matrix::Identity(dim, dim);
  inverse_ = Matrix::Identity(dim, dim) / regularizer();
}

void MnlDesignState::add(const Vector& arm) {
  design_.noalias() += arm * arm.transpose();
  const Vector u = inverse_ * arm;
  inverse_ -= (u * u.transpose()) / (1.0 + arm.dot(u));
}

double MnlDesignState::inverse_norm(const Vector& arm) const {
  return std::sqrt(std::max(0.0, arm.dot(inverse_ * arm)));
}

double MnlDesignState::lambda_min() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(design_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

namespace {

const PolicyParams& checked_mnl_params(const PolicyParams& p, int categories) {
  if (!p.kappa || !(*p.kappa > 0.0)) {
    throw std::invalid_argument("mnl_ucb_plus: kappa must be set and positive");
  }
  if (!p.R || !(*p.R > 0.0)) throw std::invalid_argument("mnl_ucb_plus: R must be set and positive");
  if (!p.L || !(*p.L > 0.0 && *p.L <= 0.5)) {
    throw std::invalid_argument("mnl_ucb_plus: L must be set and lie in (0, 1/2]");
  }
  if (p.rho.size() != categories) {
    throw std::invalid_argument("mnl_ucb_plus: rho must have K entries");
  }
  if (p.rho.norm() > *p.R * (1.0 + 1e-12)) {
    throw std::invalid_argument("mnl_ucb_plus: |rho| exceeds R");
  }
  return p;
}

}  // namespace

MnlUcbPlus::MnlUcbPlus(int dim, int categories, PolicyParams params)
    : Agent(dim, categories, checked_mnl_params(params, categories)),
      design_(dim, categories, state_.params.S, *state_.params.kappa) {}

double MnlUcbPlus::bonus(const Vector& arm) const {
  const auto& p = state_.params;
  const double gamma = gamma_mnl(dim(), categories(), p.S, state_.t, p.delta, p.c_gamma);
  return std::sqrt(2.0 * *p.kappa) * *p.R * *p.L * gamma * design_.inverse_norm(arm);
}

std::size_t MnlUcbPlus::choose(std::span<const Vector> arms) {
  require_arms(arms, dim());
  decision_ = DecisionRecord{};
  decision_.t = state_.t;
  const Matrix theta = as_param_matrix(state_.mle.solution, categories(), dim());
  for (const Vector& x : arms) {
    const double mean =
        state_.params.rho.dot(softmax_probs(x, theta).tail(categories()));
    const double b = bonus(x);
    decision_.bonuses.push_back(b);
    decision_.scores.push_back(mean + b);
  }
  decision_.arm = argmax_first(decision_.scores);
  return decision_.arm;
}

void MnlUcbPlus::on_update(const Vector& arm) { design_.add(arm); }

std::unique_ptr<Agent> make_baseline(std::string_view kind, int dim, PolicyParams params) {
  if (kind == "eps_greedy") {
    return std::make_unique<EpsGreedy>(dim, std::move(params));
  }
  if (kind == "radius_scaled" || kind == "radius_scaled_ofulog") {
    return std::make_unique<OfuLogPlus>(dim, std::move(params));
  }
  throw std::invalid_argument("unknown baseline kind '" + std::string(kind) + "'");
}

std::unique_ptr<Agent> make_agent(std::string_view kind, int dim, int categories,
                                  PolicyParams params) {
  if (kind == "ofulogplus") {
    params.radius_scale = 1.0;
    return std::make_unique<OfuLogPlus>(dim, std::move(params));
  }
  if (kind == "mnl_ucb_plus") {
    return std::make_unique<MnlUcbPlus>(dim, categories, std::move(params));
  }
  if (kind == "uniform") {
    return std::make_unique<UniformAgent>(dim, categories, std::move(params));
  }
  return make_baseline(kind, dim, std::move(params));
}

}  // namespace logbandit
