#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "safe_consensus/sim.hpp"

namespace safe_consensus {

/// Column names: t; per follower i z1_i, z2_i, V_i, psi_i, a_i, gamma_i,
/// w_a_i, w_gamma_i; per chain pair (k-1, k) dist_k and min_safe_dist_k;
/// per follower local_err_i; lyapunov.
std::vector<std::string> csv_header(std::size_t follower_count);

/// One row per record, numbers as %.9g, LF line endings.
void write_csv(std::ostream& out, const TrajectoryLog& log);

/// key = value lines.
void write_summary(std::ostream& out, const Scenario& scenario, const TrajectoryLog& log,
                   const Summary& summary);

/// Planar paths of the reference and every follower, start points marked.
void write_trajectory_svg(std::ostream& out, const TrajectoryLog& log);

/// Distance and minimum safe distance against time for every chain pair.
void write_distances_svg(std::ostream& out, const TrajectoryLog& log);

}  // namespace safe_consensus
