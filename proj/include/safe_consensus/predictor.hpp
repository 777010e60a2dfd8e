#pragma once

#include "safe_consensus/model.hpp"
#include "safe_consensus/reference.hpp"

namespace safe_consensus {

struct PredictorConfig {
  double horizon = 0.3;  // T [s]
  double rk_rel_tol = 1e-8;
  double rk_abs_tol = 1e-8;
  double fd_step = 1e-5;

  void validate() const;
  bool operator==(const PredictorConfig&) const = default;
};

/// Predicted output g(x, u) = y(t + T) and its input-Jacobian dg/du.
struct Prediction {
  Vec2 value = Vec2::Zero();
  Mat2 jacobian_u = Mat2::Zero();
};

/// Integrates the bicycle over [0, T] with the input frozen (adaptive
/// Dormand-Prince 5(4)) and returns the output at T. T = 0 returns
/// output(state) unchanged. Throws IntegratorFailure if the step size
/// controller gives up.
Vec2 predict_output(const BicycleState& state, const BicycleInput& input,
                    const BicycleParams& params, const PredictorConfig& cfg);

/// Central finite differences of predict_output in (a, gamma).
Mat2 predict_jacobian_u(const BicycleState& state, const BicycleInput& input,
                        const BicycleParams& params, const PredictorConfig& cfg);

/// Jacobian with an explicit difference step, used by convergence checks.
Mat2 predict_jacobian_u(const BicycleState& state, const BicycleInput& input,
                        const BicycleParams& params, const PredictorConfig& cfg,
                        double fd_step);

Prediction predict(const BicycleState& state, const BicycleInput& input,
                   const BicycleParams& params, const PredictorConfig& cfg);

/// The leader's future output is known exactly: r(t + T).
inline Vec2 leader_prediction(const ReferenceSignal& ref, double t, double horizon) {
  return reference_eval(ref, t + horizon);
}

}  // namespace safe_consensus
