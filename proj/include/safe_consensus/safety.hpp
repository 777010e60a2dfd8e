#pragma once

#include <span>

#include "safe_consensus/model.hpp"

namespace safe_consensus {

struct SafetyConfig {
  double k_v = 2.0;       // headway factor [s]
  double q1 = 1.0;        // weight on the acceleration-rate bias
  double q2 = 999.0;      // weight on the steering-rate bias
  double cbf_gain = 1.0;  // slope of the linear class-K function

  void validate() const;
  bool operator==(const SafetyConfig&) const = default;
};

/// Second-order integral barrier between an ego vehicle and a neighbour
/// whose position is frozen over the derivative:
///   h1 = -k_v^2 V^2 + |p - p_j|^2
///   h2 = dh1/dt + cbf_gain * h1
struct BarrierEvaluation {
  double h1 = 0.0;
  double h1_dot = 0.0;
  double h2 = 0.0;
  Vec4 grad_x_h2 = Vec4::Zero();
  Vec2 grad_u_h2 = Vec2::Zero();
  /// d|p - p_j|/dt including the neighbour's motion. Diagnostic only.
  double range_rate = 0.0;
};

/// Requirement normal . w >= offset on the bias w.
struct HalfspaceConstraint {
  Vec2 normal = Vec2::Zero();
  double offset = 0.0;

  double slack(const Vec2& w) const { return normal.dot(w) - offset; }
};

BarrierEvaluation barrier_eval(const BicycleState& ego, const BicycleInput& input,
                               const Vec2& neighbor_pos, const Vec2& neighbor_vel,
                               const SafetyConfig& cfg);

/// Builds dh2/dt + cbf_gain * h2 >= 0 as a halfspace in w given the nominal
/// input rate. Throws UnfilterableConstraint when the normal vanishes
/// (||normal|| < 1e-12) and the constraint is violated at w = 0.
HalfspaceConstraint assemble_constraint(const BicycleState& ego, const BicycleInput& input,
                                        const BicycleParams& params, const Vec2& nominal_rate,
                                        const Vec2& neighbor_pos, const Vec2& neighbor_vel,
                                        const SafetyConfig& cfg);

HalfspaceConstraint assemble_constraint(const BarrierEvaluation& barrier, const Vec4& state_rate,
                                        const Vec2& nominal_rate, const SafetyConfig& cfg);

/// Exact minimiser of q1 w1^2 + q2 w2^2 subject to every halfspace, by
/// enumeration of active sets of size 0, 1 and 2. Throws QpInfeasible when
/// no candidate is feasible.
Vec2 solve_weighted_qp(double q1, double q2, std::span<const HalfspaceConstraint> constraints);

inline Vec2 filtered_input_rate(const Vec2& nominal_rate, const Vec2& bias) {
  return nominal_rate + bias;
}

}  // namespace safe_consensus
