#pragma once

#include <Eigen/Core>

namespace safe_consensus {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;

/// Kinematic bicycle state. Heading is left unwrapped.
struct BicycleState {
  double z1 = 0.0;   // east position [m]
  double z2 = 0.0;   // north position [m]
  double V = 0.0;    // speed [m/s]
  double psi = 0.0;  // heading [rad]

  Vec4 as_vector() const { return {z1, z2, V, psi}; }
  static BicycleState from_vector(const Vec4& x) { return {x[0], x[1], x[2], x[3]}; }

  bool operator==(const BicycleState&) const = default;
};

/// Acceleration and velocity-direction angle relative to the frame heading.
struct BicycleInput {
  double a = 0.0;      // [m/s^2]
  double gamma = 0.0;  // [rad]

  Vec2 as_vector() const { return {a, gamma}; }
  static BicycleInput from_vector(const Vec2& u) { return {u[0], u[1]}; }

  bool operator==(const BicycleInput&) const = default;
};

struct BicycleParams {
  double Lf = 1.0;  // front axle to COG [m]
  double Lr = 1.0;  // rear axle to COG [m]
  double a_min = -2.0;
  double a_max = 2.0;
  double gamma_min = -0.5235987755982988;
  double gamma_max = 0.5235987755982988;

  /// Throws std::invalid_argument naming the first violated bound.
  void validate() const;

  bool operator==(const BicycleParams&) const = default;
};

/// State derivative (V cos(psi+gamma), V sin(psi+gamma), a, V/Lr sin(gamma)).
Vec4 bicycle_derivative(const BicycleState& state, const BicycleInput& input,
                        const BicycleParams& params);

inline Vec2 output(const BicycleState& state) { return {state.z1, state.z2}; }

/// Front steering angle delta_f with tan(gamma) = Lr/(Lf+Lr) tan(delta_f).
/// Throws std::domain_error when |gamma| >= pi/2.
double gamma_to_steering(double gamma, const BicycleParams& params);
double steering_to_gamma(double delta_f, const BicycleParams& params);

BicycleInput clamp_input(const BicycleInput& input, const BicycleParams& params);

}  // namespace safe_consensus
