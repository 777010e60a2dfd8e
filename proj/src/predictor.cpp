#include "safe_consensus/predictor.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "safe_consensus/errors.hpp"

namespace safe_consensus {

namespace odeint = boost::numeric::odeint;

namespace {

using OdeState = std::array<double, 4>;

std::string describe(const BicycleState& s, const BicycleInput& u) {
  std::ostringstream os;
  os.precision(17);
  os << "state (z1=" << s.z1 << ", z2=" << s.z2 << ", V=" << s.V << ", psi=" << s.psi
     << "), input (a=" << u.a << ", gamma=" << u.gamma << ")";
  return os.str();
}

}  // namespace

void PredictorConfig::validate() const {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("predictor horizon must be non-negative");
  }
  if (!(rk_rel_tol > 0.0) || !(rk_abs_tol > 0.0)) {
    throw std::invalid_argument("predictor tolerances must be positive");
  }
  if (!(fd_step > 0.0)) throw std::invalid_argument("predictor fd_step must be positive");
}

Vec2 predict_output(const BicycleState& state, const BicycleInput& input,
                    const BicycleParams& params, const PredictorConfig& cfg) {
  if (cfg.horizon == 0.0) return output(state);

  // Dynamics are translation invariant, so integrate the displacement and
  // add the start position afterwards. This keeps the error control on the
  // metre scale of the horizon rather than the absolute map coordinates.
  auto rhs = [&](const OdeState& x, OdeState& dxdt, double /*t*/) {
    const BicycleState s{x[0], x[1], x[2], x[3]};
    const Vec4 d = bicycle_derivative(s, input, params);
    dxdt = {d[0], d[1], d[2], d[3]};
  };

  OdeState x{0.0, 0.0, state.V, state.psi};
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(cfg.rk_abs_tol,
                                                                               cfg.rk_rel_tol);
  try {
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, cfg.horizon, cfg.horizon);
  } catch (const std::exception& e) {
    throw IntegratorFailure("prediction integrator failed (" + std::string(e.what()) + ") at " +
                            describe(state, input));
  }
  if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
    throw IntegratorFailure("prediction produced non-finite output at " + describe(state, input));
  }
  return {state.z1 + x[0], state.z2 + x[1]};
}

Mat2 predict_jacobian_u(const BicycleState& state, const BicycleInput& input,
                        const BicycleParams& params, const PredictorConfig& cfg,
                        double fd_step) {
  Mat2 jac = Mat2::Zero();
  if (cfg.horizon == 0.0) return jac;
  const Vec2 u = input.as_vector();
  for (int k = 0; k < 2; ++k) {
    Vec2 up = u;
    Vec2 um = u;
    up[k] += fd_step;
    um[k] -= fd_step;
    const Vec2 gp = predict_output(state, BicycleInput::from_vector(up), params, cfg);
    const Vec2 gm = predict_output(state, BicycleInput::from_vector(um), params, cfg);
    jac.col(k) = (gp - gm) / (2.0 * fd_step);
  }
  return jac;
}

Mat2 predict_jacobian_u(const BicycleState& state, const BicycleInput& input,
                        const BicycleParams& params, const PredictorConfig& cfg) {
  return predict_jacobian_u(state, input, params, cfg, cfg.fd_step);
}

Prediction predict(const BicycleState& state, const BicycleInput& input,
                   const BicycleParams& params, const PredictorConfig& cfg) {
  return {predict_output(state, input, params, cfg),
          predict_jacobian_u(state, input, params, cfg)};
}

}  // namespace safe_consensus
