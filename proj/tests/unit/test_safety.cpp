#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "safe_consensus/errors.hpp"
#include "safe_consensus/safety.hpp"
#include "safe_consensus/verify.hpp"

using namespace safe_consensus;

TEST_CASE("barrier examples") {
  const SafetyConfig cfg;
  auto b = barrier_eval({0, 0, 3, 0}, {0, 0}, {10, 0}, {0, 0}, cfg);
  CHECK(b.h1 == doctest::Approx(64.0));
  CHECK(b.h2 == b.h1_dot + cfg.cbf_gain * b.h1);

  b = barrier_eval({4, -3, 0, 1.0}, {1.5, 0.2}, {0, 0}, {0, 0}, cfg);
  CHECK(b.h1 == doctest::Approx(25.0));
  CHECK(b.h1_dot == 0.0);
  CHECK(b.grad_u_h2.isZero());

  const double d = 7.5;
  b = barrier_eval({d, 0, 1, 0}, {0, 0}, {0, 0}, {0, 0}, cfg);
  CHECK(b.h1_dot == doctest::Approx(2 * d));

  // d h2 / d a = -2 k_v^2 V, linear in V.
  b = barrier_eval({0, 0, 5, 0.2}, {0.3, 0.1}, {-20, 3}, {0, 0}, cfg);
  CHECK(b.grad_u_h2[0] == doctest::Approx(-40.0));
}

TEST_CASE("h2 identity holds for other gains") {
  SafetyConfig cfg;
  cfg.cbf_gain = 2.5;
  cfg.k_v = 3.0;
  const auto b = barrier_eval({1, 2, 4, 0.3}, {0.5, -0.1}, {-9, -8}, {1, 1}, cfg);
  CHECK(b.h2 == b.h1_dot + 2.5 * b.h1);
}

TEST_CASE("gradients agree with finite differences") {
  const auto report = verify::barrier_suite(200, 17);
  for (const auto& c : report.checks) {
    INFO(c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("constraint assembly") {
  const SafetyConfig cfg;
  const BicycleParams p{1.2, 1.7};
  // Far apart: w = 0 suffices.
  auto hc = assemble_constraint({0, 0, 5, 0}, {0, 0}, p, {0, 0}, {-100, 0}, {0, 0}, cfg);
  CHECK(hc.offset <= 0.0);
  const HalfspaceConstraint arr[] = {hc};
  CHECK(solve_weighted_qp(cfg.q1, cfg.q2, arr).isZero());

  // Stationary ego in violation cannot be filtered.
  CHECK_THROWS_AS(assemble_constraint({0, 0, 0, 0}, {2, 0}, p, {5, 0}, {1, 0}, {0, 0}, cfg),
                  UnfilterableConstraint);
  // Stationary but safe: zero normal, harmless.
  hc = assemble_constraint({0, 0, 0, 0}, {0, 0}, p, {0, 0}, {50, 0}, {0, 0}, cfg);
  CHECK(hc.normal.isZero());
  CHECK(hc.offset <= 0.0);

  // offset = -grad_x . f - grad_u . nominal - gain * h2
  const BicycleState x{3, 1, 6, 0.4};
  const BicycleInput u{0.5, -0.05};
  const Vec2 nominal(-3.0, 0.2), other(12, 5);
  const auto b = barrier_eval(x, u, other, {0, 0}, cfg);
  hc = assemble_constraint(x, u, p, nominal, other, {0, 0}, cfg);
  const double want = -b.grad_x_h2.dot(bicycle_derivative(x, u, p)) - b.grad_u_h2.dot(nominal) -
                      cfg.cbf_gain * b.h2;
  CHECK(hc.offset == doctest::Approx(want).epsilon(1e-14));
  CHECK(hc.normal == b.grad_u_h2);
}

TEST_CASE("qp examples") {
  CHECK(solve_weighted_qp(1, 1, {}).isZero());

  HalfspaceConstraint one[] = {{{1, 0}, 2}};
  Vec2 w = solve_weighted_qp(1, 1, one);
  CHECK(w[0] == doctest::Approx(2.0));
  CHECK(w[1] == doctest::Approx(0.0));

  HalfspaceConstraint diag[] = {{{1, 1}, 1}};
  w = solve_weighted_qp(1, 999, diag);
  CHECK(w[0] == doctest::Approx(0.999));
  CHECK(w[1] == doctest::Approx(0.001));

  HalfspaceConstraint both[] = {{{1, 0}, 1}, {{0, 1}, 1}};
  w = solve_weighted_qp(3, 5, both);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(1.0));

  HalfspaceConstraint contradict[] = {{{1, 0}, 1}, {{-1, 0}, 1}};
  CHECK_THROWS_AS(solve_weighted_qp(1, 1, contradict), QpInfeasible);
  HalfspaceConstraint dead[] = {{{0, 0}, 1}};
  CHECK_THROWS_AS(solve_weighted_qp(1, 1, dead), QpInfeasible);
  CHECK_THROWS_AS(solve_weighted_qp(0, 1, {}), std::invalid_argument);
}

TEST_CASE("qp properties") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 0; n < 300; ++n) {
    HalfspaceConstraint c{{U(gen), U(gen)}, 5 * U(gen)};
    const HalfspaceConstraint arr[] = {c};
    const double q1 = 1.0 + 10 * (U(gen) + 1);
    // Least invasive: a satisfied constraint leaves w exactly zero.
    if (c.offset <= 0.0) {
      CHECK(solve_weighted_qp(q1, 1.0, arr) == Vec2::Zero());
      continue;
    }
    // Heavier steering weight never grows the steering bias.
    double prev = std::numeric_limits<double>::infinity();
    for (double q2 : {1.0, 10.0, 100.0, 999.0, 1e4}) {
      const Vec2 w = solve_weighted_qp(q1, q2, arr);
      CHECK(c.slack(w) >= -1e-9);
      CHECK(std::abs(w[1]) <= prev * (1 + 1e-12));
      prev = std::abs(w[1]);
    }
  }
}

TEST_CASE("qp matches the grid oracle on a handful of instances") {
  const auto report = verify::qp_suite(40, 77);
  for (const auto& c : report.checks) {
    INFO(c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("filtered rate and config") {
  CHECK(filtered_input_rate({-1, 0}, {0, 0}) == Vec2(-1, 0));
  CHECK(filtered_input_rate({-1, 0}, {0.5, 0}) == Vec2(-0.5, 0));
  SafetyConfig cfg;
  cfg.k_v = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.q2 = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
