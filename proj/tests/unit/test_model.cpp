#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "safe_consensus/model.hpp"

using namespace safe_consensus;
using std::numbers::pi;

TEST_CASE("derivative examples") {
  BicycleParams p{1.105, 1.738};
  Vec4 d = bicycle_derivative({0, 0, 1, 0}, {0, 0}, p);
  CHECK(d.isApprox(Vec4(1, 0, 0, 0)));

  d = bicycle_derivative({0, 0, 2, pi / 2}, {1, 0}, p);
  CHECK(d[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(2.0));
  CHECK(d[2] == 1.0);
  CHECK(d[3] == 0.0);

  p.Lr = 2.0;
  d = bicycle_derivative({0, 0, 2, 0}, {0, pi / 6}, p);
  CHECK(d[0] == doctest::Approx(2 * std::cos(pi / 6)));
  CHECK(d[1] == doctest::Approx(1.0));
  CHECK(d[2] == 0.0);
  CHECK(d[3] == doctest::Approx(0.5));
}

TEST_CASE("output projects position") {
  CHECK(output({0, 0, 5, 1}) == Vec2(0, 0));
  CHECK(output({-50, -60, 0, 0}) == Vec2(-50, -60));
  CHECK(output({3.09, 0, 10.6, 0}) == Vec2(3.09, 0));
}

TEST_CASE("steering conversion") {
  BicycleParams p{1.3, 1.3};
  CHECK(gamma_to_steering(0.0, p) == 0.0);
  CHECK(gamma_to_steering(std::atan(0.5), p) == doctest::Approx(std::atan(1.0)).epsilon(1e-14));
  const BicycleParams q{1.105, 1.738};
  CHECK(std::abs(steering_to_gamma(gamma_to_steering(0.3, q), q) - 0.3) <= 1e-12);
  CHECK_THROWS_AS(gamma_to_steering(pi / 2, q), std::domain_error);
  CHECK_THROWS_AS(gamma_to_steering(-2.0, q), std::domain_error);
}

TEST_CASE("clamp examples") {
  const BicycleParams p{1.0, 1.0};
  CHECK(clamp_input({3.0, 0.0}, p).a == 2.0);
  CHECK(clamp_input({1.5, 0.1}, p) == BicycleInput{1.5, 0.1});
  CHECK(clamp_input({0.0, -1.0}, p).gamma == doctest::Approx(-pi / 6));
}

TEST_CASE("params validation names the bound") {
  BicycleParams p{1.0, 1.0};
  CHECK_NOTHROW(p.validate());
  p.Lr = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("Lr"), std::invalid_argument);
  p = {1.0, 1.0, 2.0, -2.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {1.0, 1.0, -2.0, 2.0, -2.0, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("properties over random states") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 0; n < 500; ++n) {
    const BicycleParams p{1.0 + 0.5 * U(gen), 1.5 + 0.5 * U(gen)};
    const BicycleState x{100 * U(gen), 100 * U(gen), 15 * U(gen), 10 * U(gen)};
    const BicycleInput u{3 * U(gen), 1.2 * U(gen)};
    const Vec4 d = bicycle_derivative(x, u, p);
    CHECK(Vec2(d[0], d[1]).norm() == doctest::Approx(std::abs(x.V)).epsilon(1e-12));

    const BicycleInput c = clamp_input(u, p);
    CHECK(clamp_input(c, p) == c);
    CHECK(c.a >= p.a_min);
    CHECK(c.a <= p.a_max);
    CHECK(c.gamma >= p.gamma_min);
    CHECK(c.gamma <= p.gamma_max);

    const double g = 1.4 * U(gen);
    CHECK(std::abs(steering_to_gamma(gamma_to_steering(g, p), p) - g) <= 1e-12);
  }
  // Yaw rate vanishes exactly when V = 0 or sin(gamma) = 0.
  const BicycleParams p{1.0, 1.0};
  CHECK(bicycle_derivative({0, 0, 0, 0}, {0, 0.3}, p)[3] == 0.0);
  CHECK(bicycle_derivative({0, 0, 4, 0}, {0, 0.0}, p)[3] == 0.0);
  CHECK(bicycle_derivative({0, 0, 4, 0}, {0, 0.1}, p)[3] != 0.0);
}
