#include "safe_consensus/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace safe_consensus {

void BicycleParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid bicycle parameter: ") + what);
  };
  constexpr double half_pi = std::numbers::pi / 2.0;
  require(std::isfinite(Lf) && Lf > 0.0, "Lf must be positive");
  require(std::isfinite(Lr) && Lr > 0.0, "Lr must be positive");
  require(std::isfinite(a_min) && std::isfinite(a_max) && a_min < a_max,
          "a_min must be below a_max");
  require(gamma_min > -half_pi && gamma_min < gamma_max && gamma_max < half_pi,
          "gamma bounds must satisfy -pi/2 < gamma_min < gamma_max < pi/2");
}

Vec4 bicycle_derivative(const BicycleState& state, const BicycleInput& input,
                        const BicycleParams& params) {
  const double course = state.psi + input.gamma;
  return {state.V * std::cos(course), state.V * std::sin(course), input.a,
          state.V / params.Lr * std::sin(input.gamma)};
}

double gamma_to_steering(double gamma, const BicycleParams& params) {
  if (!(std::abs(gamma) < std::numbers::pi / 2.0)) {
    throw std::domain_error("gamma_to_steering: |gamma| must be below pi/2");
  }
  return std::atan((params.Lf + params.Lr) / params.Lr * std::tan(gamma));
}

double steering_to_gamma(double delta_f, const BicycleParams& params) {
  if (!(std::abs(delta_f) < std::numbers::pi / 2.0)) {
    throw std::domain_error("steering_to_gamma: |delta_f| must be below pi/2");
  }
  return std::atan(params.Lr / (params.Lf + params.Lr) * std::tan(delta_f));
}

BicycleInput clamp_input(const BicycleInput& input, const BicycleParams& params) {
  return {std::clamp(input.a, params.a_min, params.a_max),
          std::clamp(input.gamma, params.gamma_min, params.gamma_max)};
}

}  // namespace safe_consensus
