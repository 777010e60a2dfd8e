#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "safe_consensus/model.hpp"

namespace safe_consensus {

/// Directed communication structure over agents 0..K. Agent 0 is the leader.
/// neighbors[i] lists the agents that agent i receives from.
struct Topology {
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t agent_count() const { return neighbors.size(); }
  std::size_t follower_count() const { return neighbors.empty() ? 0 : neighbors.size() - 1; }

  /// Throws std::invalid_argument on out-of-range indices, self-loops or duplicates.
  void validate() const;

  bool operator==(const Topology&) const = default;
};

using LaplacianMatrix = Eigen::MatrixXd;

/// Leader-follower chain 0 <- 1 <-> 2 <-> ... <-> K. Throws for K = 0.
Topology path_graph(std::size_t follower_count);

/// L = D - A, A(i, j) = 1 iff agent i receives from agent j.
LaplacianMatrix laplacian(const Topology& topology);

/// Numerical rank from singular values, threshold 1e-9 * sigma_max.
std::size_t numerical_rank(const Eigen::MatrixXd& m);

/// True iff rank(L) = agent_count - 1.
bool has_rooted_out_branching(const LaplacianMatrix& L);

/// Per follower i = 1..K: || sum_{j in N_i} (y_i - y_j) ||. Index 0 of the
/// result corresponds to follower 1.
std::vector<double> local_consensus_errors(const std::vector<Vec2>& predictions,
                                           const Topology& topology);

}  // namespace safe_consensus
