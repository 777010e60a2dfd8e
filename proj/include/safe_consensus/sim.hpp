#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "safe_consensus/consensus.hpp"
#include "safe_consensus/errors.hpp"
#include "safe_consensus/graph.hpp"
#include "safe_consensus/model.hpp"
#include "safe_consensus/predictor.hpp"
#include "safe_consensus/reference.hpp"
#include "safe_consensus/safety.hpp"

namespace safe_consensus {

struct FollowerSpec {
  BicycleParams params;
  BicycleState initial_state;
  BicycleInput initial_input;

  bool operator==(const FollowerSpec&) const = default;
};

struct Scenario {
  std::string name;
  std::string notes;
  std::vector<FollowerSpec> followers;
  Topology topology;
  ReferenceSignal reference = PaperTrajectory{};
  SpeedupConfig speedups;
  PredictorConfig predictor;
  SafetyConfig safety;
  bool safety_enabled = true;
  double dt = 0.01;
  double t_end = 680.0;

  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
  std::size_t step_count() const;
  /// Neighbours follower i filters against: N_i without the virtual leader.
  std::vector<std::size_t> safety_neighbors(std::size_t follower) const;

  bool operator==(const Scenario&) const = default;
};

/// Six-agent platoon: five bicycles following the piecewise reference.
Scenario paper_platoon_scenario();

/// 64-bit FNV-1a over every configuration value of the scenario.
std::uint64_t fingerprint(const Scenario& scenario);

struct ConstraintRecord {
  std::size_t follower = 0;
  std::size_t neighbor = 0;
  double h1 = 0.0;
  double h2 = 0.0;
  double range_rate = 0.0;
};

/// Snapshot at time t plus the rates computed from it. Per-follower vectors
/// are indexed 0..K-1 for followers 1..K; per-pair vectors index the chain
/// pairs (k-1, k) for k = 1..K, so entry 0 is the leader/follower-1 pair.
struct StepRecord {
  double t = 0.0;
  Vec2 leader_position = Vec2::Zero();
  std::vector<BicycleState> states;
  std::vector<BicycleInput> inputs;
  std::vector<Vec2> predictions;
  std::vector<Vec2> nominal_rates;
  std::vector<Vec2> biases;
  std::vector<ConstraintRecord> constraints;
  std::vector<double> distances;
  std::vector<double> min_safe_distances;
  std::vector<double> local_errors;
  double lyapunov = 0.0;
  std::vector<double> prediction_gaps;  // NaN when t + T is past the run
  std::vector<bool> clamp_active;
};

struct TrajectoryLog {
  std::uint64_t scenario_fingerprint = 0;
  std::vector<StepRecord> records;
  std::vector<BicycleState> final_states;
  std::vector<BicycleInput> final_inputs;
  TerminationStatus status = TerminationStatus::completed;
  std::size_t failed_step = 0;
  std::string message;
  double reference_rate_bound = 0.0;
};

/// Bit-for-bit equality of two logs (NaN gaps compare by representation).
bool bitwise_equal(const TrajectoryLog& a, const TrajectoryLog& b);

struct StepResult {
  std::vector<BicycleState> states;
  std::vector<BicycleInput> inputs;
  StepRecord record;
};

struct RunOptions {
  /// Evaluate per-follower work concurrently inside each step.
  bool parallel = false;
};

/// One synchronous forward-Euler step from the snapshot at time t.
/// Throws SimulationError subclasses on controller failure.
StepResult step(const std::vector<BicycleState>& states, const std::vector<BicycleInput>& inputs,
                double t, const Scenario& scenario, const RunOptions& options = {});

TrajectoryLog run(const Scenario& scenario, const RunOptions& options = {});

struct Summary {
  TerminationStatus status = TerminationStatus::completed;
  std::size_t steps = 0;
  /// min over time of distance - min_safe_distance, follower pairs only.
  double min_safety_margin = std::numeric_limits<double>::infinity();
  std::vector<double> pair_min_margins;  // chain pairs (k-1, k), k = 1..K
  double steady_state_local_error = 0.0;
  std::vector<double> steady_state_local_errors;
  std::vector<std::size_t> activation_counts;
  std::size_t clamp_while_constrained = 0;
  double max_prediction_gap = 0.0;
  double reference_rate_bound = 0.0;
  double final_lyapunov = 0.0;
};

/// Bias norm above which the barrier filter counts as active.
inline constexpr double kActivationThreshold = 1e-6;

Summary summarize(const TrajectoryLog& log);

}  // namespace safe_consensus
