#include "safe_consensus/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safe_consensus/errors.hpp"

namespace safe_consensus {

double SpeedupConfig::min() const {
  if (alpha.empty()) throw std::invalid_argument("speedup config is empty");
  return *std::min_element(alpha.begin(), alpha.end());
}

void SpeedupConfig::validate() const {
  for (double a : alpha) {
    if (!std::isfinite(a) || a < 1.0) {
      throw std::invalid_argument("speedup factor alpha must be >= 1");
    }
  }
}

Vec2 nominal_input_rate(std::size_t follower, std::span<const Vec2> outputs,
                        const Mat2& jacobian_u, double alpha, const Topology& topology) {
  if (follower == 0 || follower >= topology.agent_count()) {
    throw std::out_of_range("nominal_input_rate: follower index out of range");
  }
  if (outputs.size() != topology.agent_count()) {
    throw std::invalid_argument("nominal_input_rate: one output per agent required");
  }

  Vec2 disagreement = Vec2::Zero();
  for (std::size_t j : topology.neighbors[follower]) {
    disagreement += outputs[follower] - outputs[j];
  }

  const double det = jacobian_u(0, 0) * jacobian_u(1, 1) - jacobian_u(0, 1) * jacobian_u(1, 0);
  const double scale = jacobian_u.squaredNorm();
  if (!(std::abs(det) >= 1e-12 * scale) || scale == 0.0) {
    std::ostringstream os;
    os.precision(12);
    os << "singular prediction Jacobian for follower " << follower << ": det=" << det
       << ", J=[" << jacobian_u(0, 0) << ", " << jacobian_u(0, 1) << "; " << jacobian_u(1, 0)
       << ", " << jacobian_u(1, 1) << "]";
    throw SingularJacobian(os.str());
  }

  // Direct 2x2 solve via the adjugate.
  Mat2 inverse;
  inverse << jacobian_u(1, 1), -jacobian_u(0, 1), -jacobian_u(1, 0), jacobian_u(0, 0);
  inverse /= det;
  return -alpha * (inverse * disagreement);
}

Vec2 nominal_input_rate(std::size_t follower, std::span<const Prediction> predictions,
                        const SpeedupConfig& cfg, const Topology& topology) {
  std::vector<Vec2> outputs;
  outputs.reserve(predictions.size());
  for (const auto& p : predictions) outputs.push_back(p.value);
  return nominal_input_rate(follower, outputs, predictions[follower].jacobian_u,
                            cfg.for_follower(follower), topology);
}

double lyapunov_value(std::span<const Vec2> outputs) {
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < outputs.size(); ++i) {
    v += (outputs[i] - outputs[i + 1]).squaredNorm();
  }
  return 0.5 * v;
}

}  // namespace safe_consensus
