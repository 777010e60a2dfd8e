#pragma once

#include <variant>
#include <vector>

#include "safe_consensus/model.hpp"

namespace safe_consensus {

/// Platoon reference: straight approach until t = 40/3 s, then a slow
/// Lissajous curve (350 sin(0.01 tau), 210 sin(0.02 tau)).
struct PaperTrajectory {
  static constexpr double switch_time = 40.0 / 3.0;
  bool operator==(const PaperTrajectory&) const = default;
};

struct ConstantPoint {
  Vec2 point = Vec2::Zero();
  bool operator==(const ConstantPoint&) const = default;
};

/// One segment of a parametric curve, active from t_start until the next
/// segment begins:
///   r(t) = offset + velocity * tau + amplitude .* sin(frequency .* tau + phase),
/// with tau = t - t_start.
struct ReferencePiece {
  double t_start = 0.0;
  Vec2 offset = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 amplitude = Vec2::Zero();
  Vec2 frequency = Vec2::Zero();
  Vec2 phase = Vec2::Zero();

  Vec2 value(double t) const;
  Vec2 rate(double t) const;
  bool operator==(const ReferencePiece&) const = default;
};

struct ParametricCurve {
  std::vector<ReferencePiece> pieces;

  /// Pieces must start at t = 0, be strictly ordered and join continuously.
  void validate() const;
  bool operator==(const ParametricCurve&) const = default;
};

using ReferenceSignal = std::variant<PaperTrajectory, ConstantPoint, ParametricCurve>;

Vec2 reference_eval(const ReferenceSignal& ref, double t);
Vec2 reference_rate(const ReferenceSignal& ref, double t);

/// Sampled estimate of sup ||dr/dt|| over [0, horizon].
double reference_rate_bound(const ReferenceSignal& ref, double horizon, double sample_step = 0.01);

}  // namespace safe_consensus
