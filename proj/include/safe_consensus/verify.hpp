#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safe_consensus/safety.hpp"

namespace safe_consensus::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const;
  void add(std::string name, bool ok, std::string detail);
};

/// Minimum of q1 w1^2 + q2 w2^2 over grid points of [-50, 50]^2 spaced
/// `step` apart that satisfy every constraint exactly. Rows in w1 are
/// scanned exhaustively; within a row the feasible w2 set is an interval,
/// so its grid point closest to zero is the row minimum.
/// Empty when no grid point is feasible.
struct GridOptimum {
  Vec2 w;
  double objective;
};
std::optional<GridOptimum> grid_oracle(double q1, double q2,
                                       std::span<const HalfspaceConstraint> constraints,
                                       double step = 0.01);

Report qp_suite(std::size_t instances = 1000, std::uint64_t seed = 0x5eed0001);
/// Closed-form straight-line prediction and Richardson convergence of the
/// input Jacobian.
Report jacobian_suite(std::uint64_t seed = 0x5eed0002);
Report graph_suite();
Report euler_suite();
/// Steady-state local error over alpha in {5, 10, 20} for the platoon
/// truncated to t_end.
Report alpha_sweep_suite(double t_end = 120.0);
/// Analytic barrier gradients against central differences.
Report barrier_suite(std::size_t points = 1000, std::uint64_t seed = 0x5eed0003);

/// Names accepted by run_suite: qp, jacobian, graph, euler, alpha-sweep.
const std::vector<std::string_view>& suite_names();
std::optional<Report> run_suite(std::string_view name);

}  // namespace safe_consensus::verify
