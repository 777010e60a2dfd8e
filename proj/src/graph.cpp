#include "safe_consensus/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace safe_consensus {

void Topology::validate() const {
  const std::size_t n = neighbors.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nbrs = neighbors[i];
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const std::size_t j = nbrs[k];
      if (j >= n) {
        throw std::invalid_argument("topology: agent " + std::to_string(i) +
                                    " lists out-of-range neighbor " + std::to_string(j));
      }
      if (j == i) {
        throw std::invalid_argument("topology: self-loop at agent " + std::to_string(i));
      }
      if (std::find(nbrs.begin(), nbrs.begin() + static_cast<std::ptrdiff_t>(k), j) !=
          nbrs.begin() + static_cast<std::ptrdiff_t>(k)) {
        throw std::invalid_argument("topology: duplicate neighbor " + std::to_string(j) +
                                    " at agent " + std::to_string(i));
      }
    }
  }
}

Topology path_graph(std::size_t follower_count) {
  if (follower_count == 0) {
    throw std::invalid_argument("path_graph: at least one follower is required");
  }
  Topology topo;
  topo.neighbors.resize(follower_count + 1);
  for (std::size_t i = 1; i < follower_count; ++i) {
    topo.neighbors[i] = {i - 1, i + 1};
  }
  topo.neighbors[follower_count] = {follower_count - 1};
  return topo;
}

LaplacianMatrix laplacian(const Topology& topology) {
  const auto n = static_cast<Eigen::Index>(topology.agent_count());
  LaplacianMatrix L = LaplacianMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j : topology.neighbors[static_cast<std::size_t>(i)]) {
      L(i, static_cast<Eigen::Index>(j)) -= 1.0;
      L(i, i) += 1.0;
    }
  }
  return L;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv.maxCoeff() : 0.0;
  if (smax == 0.0) return 0;
  const double threshold = 1e-9 * smax;
  return static_cast<std::size_t>((sv.array() > threshold).count());
}

bool has_rooted_out_branching(const LaplacianMatrix& L) {
  if (L.rows() == 0) return false;
  return numerical_rank(L) == static_cast<std::size_t>(L.rows() - 1);
}

std::vector<double> local_consensus_errors(const std::vector<Vec2>& predictions,
                                           const Topology& topology) {
  if (predictions.size() != topology.agent_count()) {
    throw std::invalid_argument("local_consensus_errors: one prediction per agent required");
  }
  std::vector<double> errors;
  errors.reserve(topology.follower_count());
  for (std::size_t i = 1; i < topology.agent_count(); ++i) {
    Vec2 sum = Vec2::Zero();
    for (std::size_t j : topology.neighbors[i]) sum += predictions[i] - predictions[j];
    errors.push_back(sum.norm());
  }
  return errors;
}

}  // namespace safe_consensus
