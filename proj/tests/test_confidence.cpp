#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "logbandit/confidence.hpp"
#include "test_support.hpp"

using namespace logbandit;
using testing_support::random_history;
using testing_support::spec_for;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

Big big_radius_logistic(int d, Big S, long t, Big delta) {
  const Big e = boost::multiprecision::exp(Big(1));
  return 10 * d * log(S * t / (4 * d) + e) + 2 * ((e - 2) + S) * log(1 / delta);
}

Big big_radius_mnl(int d, int K, Big S, long t, Big delta) {
  const Big e = boost::multiprecision::exp(Big(1));
  const int kp = K + 1;
  return 5 * d * kp * log(e + S * t / (d * kp)) + 2 * ((e - 2) + sqrt(Big(6 * K)) * S) * log(1 / delta);
}

Big big_gamma(int d, int K, Big S, long t, Big delta, Big c) {
  const Big e = boost::multiprecision::exp(Big(1));
  return sqrt(c * (d * K * S * log(e + S * t / (d * K)) + sqrt(Big(K)) * S * log(1 / delta)));
}

double rel(double value, const Big& ref) {
  return static_cast<double>(abs((Big(value) - ref) / ref));
}

}  // namespace

TEST_CASE("radius_logistic against a 50-digit evaluation") {
  CHECK(radius_logistic(2, 5.0, 4000, 0.05) == doctest::Approx(190.76353750341077962).epsilon(1e-13));
  CHECK(radius_logistic(2, 10.0, 4000, 0.05) == doctest::Approx(234.57293958221102372).epsilon(1e-13));
  for (int d : {1, 2, 5}) {
    for (double S : {0.5, 1.0, 5.0, 10.0}) {
      for (long t : {1L, 7L, 4000L, 1000000L}) {
        for (double delta : {0.01, 0.05, 0.5}) {
          CHECK(rel(radius_logistic(d, S, t, delta), big_radius_logistic(d, S, t, delta)) <= 1e-12);
        }
      }
    }
  }
  CHECK(radius_logistic(2, 5.0, 1, 0.05) < radius_logistic(2, 5.0, 2, 0.05));
  CHECK(radius_logistic(2, 5.0, 10, 0.01) > radius_logistic(2, 5.0, 10, 0.05));
  const double near_one = radius_logistic(2, 5.0, 10, 1.0 - 1e-12);
  CHECK(near_one == doctest::Approx(20.0 * std::log(5.0 * 10 / 8.0 + std::exp(1.0))).epsilon(1e-9));
  CHECK_THROWS_AS(radius_logistic(2, 5.0, 10, 1.0), std::domain_error);
  CHECK_THROWS_AS(radius_logistic(2, 5.0, 10, 0.0), std::domain_error);
}

TEST_CASE("radius_mnl against a 50-digit evaluation") {
  CHECK(radius_mnl(2, 3, 5.0, 4000, 0.05) == doctest::Approx(444.40702574066269913).epsilon(1e-13));
  CHECK(radius_mnl(1, 1, 1.0, 1, 0.5) == doctest::Approx(16.079940101512047789).epsilon(1e-13));
  for (int d : {1, 2, 4}) {
    for (int K : {1, 2, 3, 5}) {
      for (long t : {1L, 100L, 4000L}) {
        for (double delta : {0.05, 0.3}) {
          CHECK(rel(radius_mnl(d, K, 3.0, t, delta), big_radius_mnl(d, K, 3.0, t, delta)) <= 1e-12);
        }
      }
    }
  }
  CHECK(radius_mnl(2, 2, 5.0, 100, 0.05) < radius_mnl(2, 3, 5.0, 100, 0.05));
  CHECK_THROWS_AS(radius_mnl(2, 3, 5.0, 10, 1.5), std::domain_error);
}

TEST_CASE("gamma_mnl") {
  CHECK(gamma_mnl(2, 3, 5.0, 1, 0.05, 1.0) == doctest::Approx(7.9978670139891393274).epsilon(1e-13));
  CHECK(rel(gamma_mnl(3, 2, 4.0, 77, 0.1, 2.5), big_gamma(3, 2, 4.0, 77, 0.1, 2.5)) <= 1e-12);
  const double g1 = gamma_mnl(2, 3, 5.0, 50, 0.05, 1.0);
  const double g4 = gamma_mnl(2, 3, 5.0, 50, 0.05, 4.0);
  CHECK(g4 * g4 == doctest::Approx(4.0 * g1 * g1).epsilon(1e-14));
  double previous = 0.0;
  for (long t = 1; t < 5000; t += 37) {
    const double g = gamma_mnl(2, 3, 5.0, t, 0.05, 1.0);
    CHECK(g >= previous);
    previous = g;
  }
  CHECK_THROWS_AS(gamma_mnl(2, 3, 5.0, 1, 0.05, 0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_mnl(2, 3, 5.0, 1, 1.0, 1.0), std::domain_error);
}

TEST_CASE("contains") {
  const Vector theta_star = Eigen::Vector2d(1.5, -0.5);
  const History history = random_history(theta_star, 60, 3);
  const ConfidenceSpec spec = spec_for(history, 5.0, radius_logistic(2, 5.0, 61, 0.05));
  CHECK(contains(spec, spec.center()));
  CHECK(std::abs(spec.loss_gap(spec.center())) <= 1e-12);
  CHECK_FALSE(contains(spec, Eigen::Vector2d(10.0, 0.0)));

  History empty(2, 1);
  const ConfidenceSpec ball = spec_for(empty, 5.0, 3.0);
  CounterRng rng(1, StreamPurpose::kLemma);
  for (int i = 0; i < 100; ++i) CHECK(contains(ball, 5.0 * uniform_in_ball(2, rng)));
  CHECK(contains(ball, Eigen::Vector2d(5.0, 0.0)));
  CHECK_FALSE(contains(ball, Eigen::Vector2d(5.001, 0.0)));
}

TEST_CASE("nested radii give nested sets") {
  const History history = random_history(Eigen::Vector2d(2.0, 1.0), 200, 4);
  const ConfidenceSpec big = spec_for(history, 5.0, 8.0);
  const ConfidenceSpec small = big.scaled(0.25);
  CHECK(small.radius_sq() == 2.0);
  CounterRng rng(2, StreamPurpose::kLemma);
  int inside_small = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vector theta = 5.0 * uniform_in_ball(2, rng);
    if (contains(small, theta)) {
      ++inside_small;
      CHECK(contains(big, theta));
    }
  }
  CHECK(inside_small > 0);
}

TEST_CASE("boundary_trace_2d") {
  History empty(2, 1);
  const ConfidenceSpec ball = spec_for(empty, 5.0, 1.0);
  const auto square = boundary_trace_2d(ball, 4);
  REQUIRE(square.size() == 4);
  for (const auto& p : square) CHECK(p.norm() == doctest::Approx(5.0).epsilon(1e-9));

  const History history = random_history(Eigen::Vector2d(2.0, 2.0), 300, 5);
  const ConfidenceSpec spec = spec_for(history, 5.0, radius_logistic(2, 5.0, 301, 0.05) / 8.0);
  const auto polygon = boundary_trace_2d(spec, 256);
  REQUIRE(polygon.size() == 256);

  // Convex and counter-clockwise up to bisection error.
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d a = polygon[i], b = polygon[(i + 1) % n], c = polygon[(i + 2) % n];
    const Eigen::Vector2d u = b - a, v = c - b;
    CHECK(u.x() * v.y() - u.y() * v.x() >= -1e-8);
  }
  CHECK(point_in_convex_polygon(polygon, spec.center(), 0.0));

  const auto inner = boundary_trace_2d(spec.scaled(0.25), 256);
  for (const auto& p : inner) CHECK(point_in_convex_polygon(polygon, p));

  // Vertices sit on the set boundary.
  for (const auto& p : polygon) {
    const bool on_ball = std::abs(p.norm() - 5.0) <= 1e-8;
    const bool on_level = std::abs(spec.loss_gap(p) - spec.radius_sq()) <= 1e-6;
    CHECK((on_ball || on_level));
  }

  History three(3, 1);
  CHECK_THROWS_AS(boundary_trace_2d(spec_for(three, 5.0, 1.0), 8), std::invalid_argument);
  CHECK_THROWS_AS(boundary_trace_2d(ball, 2), std::invalid_argument);
}

TEST_CASE("point_in_convex_polygon") {
  const std::vector<Eigen::Vector2d> square = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  CHECK(point_in_convex_polygon(square, Eigen::Vector2d(0, 0)));
  CHECK(point_in_convex_polygon(square, Eigen::Vector2d(1, 0)));
  CHECK_FALSE(point_in_convex_polygon(square, Eigen::Vector2d(1.1, 0)));
}

TEST_CASE("coverage ledger") {
  CoverageLedger ledger;
  ledger.record(true);
  ledger.record(true);
  CHECK_FALSE(ledger.current_run_violated());
  ledger.close_run();
  ledger.record(true);
  ledger.record(false);
  CHECK(ledger.current_run_violated());
  ledger.close_run();
  CHECK(ledger.runs() == 2);
  CHECK(ledger.failures() == 1);
  CHECK(ledger.failure_rate() == 0.5);
  CHECK(ledger.flags().empty());
}
