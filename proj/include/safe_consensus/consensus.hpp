#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "safe_consensus/graph.hpp"
#include "safe_consensus/model.hpp"
#include "safe_consensus/predictor.hpp"
#include "safe_consensus/reference.hpp"

namespace safe_consensus {

/// Newton-Raphson speedup factor per follower; alpha[0] belongs to follower 1.
struct SpeedupConfig {
  std::vector<double> alpha;

  double for_follower(std::size_t i) const { return alpha.at(i - 1); }
  double min() const;
  void validate() const;

  bool operator==(const SpeedupConfig&) const = default;
};

/// u_dot_i = -alpha_i * (dg_i/du_i)^-1 * sum_{j in N_i} (g_i - g_j).
///
/// `outputs` holds one predicted output per agent (leader at index 0). Throws
/// SingularJacobian when |det J| < 1e-12 ||J||_F^2.
Vec2 nominal_input_rate(std::size_t follower, std::span<const Vec2> outputs,
                        const Mat2& jacobian_u, double alpha, const Topology& topology);

Vec2 nominal_input_rate(std::size_t follower, std::span<const Prediction> predictions,
                        const SpeedupConfig& cfg, const Topology& topology);

/// V = 1/2 sum_{i=0}^{K-1} ||g_i - g_{i+1}||^2 over the chain ordering.
double lyapunov_value(std::span<const Vec2> outputs);

}  // namespace safe_consensus
