#include "safe_consensus/safety.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "safe_consensus/errors.hpp"

namespace safe_consensus {

void SafetyConfig::validate() const {
  if (!(k_v >= 2.0)) throw std::invalid_argument("safety k_v must be at least 2 s");
  if (!(q1 > 0.0) || !(q2 > 0.0)) throw std::invalid_argument("safety weights must be positive");
  if (!(cbf_gain > 0.0)) throw std::invalid_argument("safety cbf_gain must be positive");
}

BarrierEvaluation barrier_eval(const BicycleState& ego, const BicycleInput& input,
                               const Vec2& neighbor_pos, const Vec2& neighbor_vel,
                               const SafetyConfig& cfg) {
  const double k2 = cfg.k_v * cfg.k_v;
  const double kappa = cfg.cbf_gain;
  const double dx = ego.z1 - neighbor_pos[0];
  const double dy = ego.z2 - neighbor_pos[1];
  const double c = std::cos(ego.psi + input.gamma);
  const double s = std::sin(ego.psi + input.gamma);
  const double V = ego.V;
  const double a = input.a;

  // Projection of the offset onto the velocity direction and its normal.
  const double along = dx * c + dy * s;
  const double across = -dx * s + dy * c;

  BarrierEvaluation out;
  out.h1 = -k2 * V * V + dx * dx + dy * dy;
  out.h1_dot = -2.0 * k2 * V * a + 2.0 * V * along;
  out.h2 = out.h1_dot + kappa * out.h1;

  out.grad_x_h2 << 2.0 * V * c + 2.0 * kappa * dx,  //
      2.0 * V * s + 2.0 * kappa * dy,                //
      -2.0 * k2 * a + 2.0 * along - 2.0 * kappa * k2 * V,
      2.0 * V * across;
  out.grad_u_h2 << -2.0 * k2 * V, 2.0 * V * across;

  const double dist = std::hypot(dx, dy);
  if (dist > 0.0) {
    const Vec2 rel_vel = Vec2(V * c, V * s) - neighbor_vel;
    out.range_rate = (dx * rel_vel[0] + dy * rel_vel[1]) / dist;
  }
  return out;
}

HalfspaceConstraint assemble_constraint(const BarrierEvaluation& barrier, const Vec4& state_rate,
                                        const Vec2& nominal_rate, const SafetyConfig& cfg) {
  HalfspaceConstraint hc;
  hc.normal = barrier.grad_u_h2;
  hc.offset = -barrier.grad_x_h2.dot(state_rate) - barrier.grad_u_h2.dot(nominal_rate) -
              cfg.cbf_gain * barrier.h2;
  if (hc.normal.norm() < 1e-12 && hc.offset > 0.0) {
    std::ostringstream os;
    os << "barrier constraint has a vanishing bias normal while violated (offset=" << hc.offset
       << "); the vehicle is likely stationary";
    throw UnfilterableConstraint(os.str());
  }
  return hc;
}

HalfspaceConstraint assemble_constraint(const BicycleState& ego, const BicycleInput& input,
                                        const BicycleParams& params, const Vec2& nominal_rate,
                                        const Vec2& neighbor_pos, const Vec2& neighbor_vel,
                                        const SafetyConfig& cfg) {
  const auto barrier = barrier_eval(ego, input, neighbor_pos, neighbor_vel, cfg);
  return assemble_constraint(barrier, bicycle_derivative(ego, input, params), nominal_rate, cfg);
}

namespace {

bool feasible(const Vec2& w, std::span<const HalfspaceConstraint> constraints) {
  for (const auto& c : constraints) {
    const double tol = 1e-12 * std::max({1.0, std::abs(c.offset), c.normal.norm() * w.norm()});
    if (c.slack(w) < -tol) return false;
  }
  return true;
}

}  // namespace

Vec2 solve_weighted_qp(double q1, double q2, std::span<const HalfspaceConstraint> constraints) {
  if (!(q1 > 0.0) || !(q2 > 0.0)) {
    throw std::invalid_argument("solve_weighted_qp: weights must be positive");
  }
  const Vec2 q_inv(1.0 / q1, 1.0 / q2);
  auto objective = [&](const Vec2& w) { return q1 * w[0] * w[0] + q2 * w[1] * w[1]; };

  std::optional<Vec2> best;
  double best_value = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec2& w) {
    if (!w.allFinite() || !feasible(w, constraints)) return;
    const double value = objective(w);
    if (value < best_value) {
      best_value = value;
      best = w;
    }
  };

  consider(Vec2::Zero());
  if (best) return *best;

  // One active constraint: w = Q^-1 a b / (a' Q^-1 a).
  for (const auto& c : constraints) {
    const Vec2 qa = q_inv.cwiseProduct(c.normal);
    const double denom = c.normal.dot(qa);
    if (denom > 0.0) consider(qa * (c.offset / denom));
  }

  // Two active constraints: the intersection point of both boundaries.
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    for (std::size_t j = i + 1; j < constraints.size(); ++j) {
      Mat2 A;
      A.row(0) = constraints[i].normal.transpose();
      A.row(1) = constraints[j].normal.transpose();
      const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
      if (std::abs(det) <= 1e-14 * A.squaredNorm()) continue;
      const Vec2 b(constraints[i].offset, constraints[j].offset);
      Mat2 inverse;
      inverse << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
      consider((inverse * b) / det);
    }
  }

  if (!best) {
    std::ostringstream os;
    os << "safety QP infeasible with " << constraints.size() << " constraint(s):";
    for (const auto& c : constraints) {
      os << " [a=(" << c.normal[0] << ", " << c.normal[1] << "), b=" << c.offset << "]";
    }
    throw QpInfeasible(os.str());
  }
  return *best;
}

}  // namespace safe_consensus
