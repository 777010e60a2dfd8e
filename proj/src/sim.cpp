#include "safe_consensus/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <execution>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>

namespace safe_consensus {

std::string_view to_string(TerminationStatus status) {
  switch (status) {
    case TerminationStatus::completed: return "completed";
    case TerminationStatus::singular_jacobian: return "singular-jacobian";
    case TerminationStatus::qp_infeasible: return "qp-infeasible";
    case TerminationStatus::unfilterable_constraint: return "unfilterable-constraint";
    case TerminationStatus::integrator_failure: return "integrator-failure";
  }
  return "unknown";
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
  if (followers.empty()) fail("at least one follower is required");
  if (topology.agent_count() != followers.size() + 1) {
    fail("topology agent count must equal follower count + 1");
  }
  topology.validate();
  if (speedups.alpha.size() != followers.size()) fail("one speedup factor per follower required");
  speedups.validate();
  predictor.validate();
  safety.validate();
  if (const auto* curve = std::get_if<ParametricCurve>(&reference)) curve->validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(t_end >= dt) || !std::isfinite(t_end)) fail("t_end must be at least dt");
  for (std::size_t i = 0; i < followers.size(); ++i) {
    const auto& f = followers[i];
    f.params.validate();
    if (!f.initial_state.as_vector().allFinite() || !f.initial_input.as_vector().allFinite()) {
      fail("follower " + std::to_string(i + 1) + " has a non-finite initial condition");
    }
  }
}

std::size_t Scenario::step_count() const {
  // Guard against t_end / dt landing a hair above an integer.
  const double ratio = t_end / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

std::vector<std::size_t> Scenario::safety_neighbors(std::size_t follower) const {
  std::vector<std::size_t> out;
  for (std::size_t j : topology.neighbors.at(follower)) {
    if (j != 0) out.push_back(j);
  }
  return out;
}

Scenario paper_platoon_scenario() {
  Scenario s;
  s.name = "paper_platoon";
  s.notes =
      "Steering bound read as [-pi/6, pi/6]. Followers start on the reference line "
      "with the leader's initial speed and heading and zero inputs.";
  const double Lf[] = {1.105, 1.2, 1.5, 1.2, 1.3};
  const double Lr[] = {1.738, 1.7, 1.3, 1.4, 1.3};
  const Vec2 lead_velocity(3.75, 4.5);
  for (int i = 0; i < 5; ++i) {
    FollowerSpec f;
    f.params = {Lf[i], Lr[i], -2.0, 2.0, -std::numbers::pi / 6.0, std::numbers::pi / 6.0};
    f.initial_state = {-50.0 - 10.0 * i, -60.0 - 12.0 * i, lead_velocity.norm(),
                       std::atan2(lead_velocity[1], lead_velocity[0])};
    f.initial_input = {0.0, 0.0};
    s.followers.push_back(f);
  }
  s.topology = path_graph(5);
  s.reference = PaperTrajectory{};
  s.speedups.alpha.assign(5, 10.0);
  s.predictor = {0.3, 1e-8, 1e-8, 1e-5};
  s.safety = {2.0, 1.0, 999.0, 1.0};
  s.safety_enabled = true;
  s.dt = 0.01;
  s.t_end = 680.0;
  return s;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
      hash_ ^= p[k];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void real(double v) { bytes(&v, sizeof v); }
  void integer(std::uint64_t v) { bytes(&v, sizeof v); }
  void vec(const Vec2& v) {
    real(v[0]);
    real(v[1]);
  }
  void text(const std::string& s) {
    integer(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t fingerprint(const Scenario& s) {
  Fnv1a h;
  h.text(s.name);
  h.integer(s.followers.size());
  for (const auto& f : s.followers) {
    for (double v : {f.params.Lf, f.params.Lr, f.params.a_min, f.params.a_max, f.params.gamma_min,
                     f.params.gamma_max, f.initial_state.z1, f.initial_state.z2, f.initial_state.V,
                     f.initial_state.psi, f.initial_input.a, f.initial_input.gamma}) {
      h.real(v);
    }
  }
  for (const auto& nbrs : s.topology.neighbors) {
    h.integer(nbrs.size());
    for (std::size_t j : nbrs) h.integer(j);
  }
  h.integer(s.reference.index());
  if (const auto* c = std::get_if<ConstantPoint>(&s.reference)) h.vec(c->point);
  if (const auto* c = std::get_if<ParametricCurve>(&s.reference)) {
    for (const auto& p : c->pieces) {
      h.real(p.t_start);
      for (const Vec2* v : {&p.offset, &p.velocity, &p.amplitude, &p.frequency, &p.phase}) h.vec(*v);
    }
  }
  for (double a : s.speedups.alpha) h.real(a);
  for (double v : {s.predictor.horizon, s.predictor.rk_rel_tol, s.predictor.rk_abs_tol,
                   s.predictor.fd_step, s.safety.k_v, s.safety.q1, s.safety.q2,
                   s.safety.cbf_gain, s.dt, s.t_end}) {
    h.real(v);
  }
  h.integer(s.safety_enabled ? 1 : 0);
  return h.value();
}

namespace {

/// Runs fn(i) for i in [0, n), optionally in parallel. Exceptions are
/// captured per index and the lowest-index one is rethrown, so failures are
/// reported identically in both modes.
template <class Fn>
void for_each_index(std::size_t n, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (parallel) {
    std::for_each(std::execution::par, idx.begin(), idx.end(), guarded);
  } else {
    std::for_each(idx.begin(), idx.end(), guarded);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Vec2 planar_velocity(const BicycleState& s, const BicycleInput& u) {
  return {s.V * std::cos(s.psi + u.gamma), s.V * std::sin(s.psi + u.gamma)};
}

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, const std::string& context) {
  throw E(context + ": " + e.what());
}

}  // namespace

StepResult step(const std::vector<BicycleState>& states, const std::vector<BicycleInput>& inputs,
                double t, const Scenario& scenario, const RunOptions& options) {
  const std::size_t K = scenario.followers.size();
  if (states.size() != K || inputs.size() != K) {
    throw std::invalid_argument("step: one state and input per follower required");
  }
  const double T = scenario.predictor.horizon;

  // (1) follower predictions; (2) leader prediction.
  std::vector<Prediction> predictions(K + 1);
  predictions[0].value = leader_prediction(scenario.reference, t, T);
  for_each_index(K, options.parallel, [&](std::size_t k) {
    predictions[k + 1] =
        predict(states[k], inputs[k], scenario.followers[k].params, scenario.predictor);
  });
  std::vector<Vec2> outputs(K + 1);
  for (std::size_t i = 0; i <= K; ++i) outputs[i] = predictions[i].value;

  StepRecord rec;
  rec.t = t;
  rec.leader_position = reference_eval(scenario.reference, t);
  rec.states = states;
  rec.inputs = inputs;
  rec.predictions.assign(outputs.begin() + 1, outputs.end());
  rec.nominal_rates.assign(K, Vec2::Zero());
  rec.biases.assign(K, Vec2::Zero());
  rec.clamp_active.assign(K, false);

  // (3) nominal rates; (4) barrier biases, all from the same snapshot.
  std::vector<std::vector<ConstraintRecord>> constraint_logs(K);
  for_each_index(K, options.parallel, [&](std::size_t k) {
    const std::size_t i = k + 1;
    const Vec2 nominal = nominal_input_rate(i, outputs, predictions[i].jacobian_u,
                                            scenario.speedups.for_follower(i), scenario.topology);
    rec.nominal_rates[k] = nominal;
    if (!scenario.safety_enabled) return;

    const Vec4 state_rate =
        bicycle_derivative(states[k], inputs[k], scenario.followers[k].params);
    std::vector<HalfspaceConstraint> constraints;
    for (std::size_t j : scenario.safety_neighbors(i)) {
      const auto& nb_state = states[j - 1];
      const auto& nb_input = inputs[j - 1];
      const auto barrier = barrier_eval(states[k], inputs[k], output(nb_state),
                                        planar_velocity(nb_state, nb_input), scenario.safety);
      const std::string context =
          "follower " + std::to_string(i) + " vs agent " + std::to_string(j);
      try {
        constraints.push_back(assemble_constraint(barrier, state_rate, nominal, scenario.safety));
      } catch (const UnfilterableConstraint& e) {
        rethrow_with_context(e, context);
      }
      constraint_logs[k].push_back({i, j, barrier.h1, barrier.h2, barrier.range_rate});
    }
    try {
      rec.biases[k] = solve_weighted_qp(scenario.safety.q1, scenario.safety.q2, constraints);
    } catch (const QpInfeasible& e) {
      rethrow_with_context(e, "follower " + std::to_string(i));
    }
  });
  for (auto& logs : constraint_logs) {
    rec.constraints.insert(rec.constraints.end(), logs.begin(), logs.end());
  }

  // (5) input update with saturation; (6) state update with pre-update inputs.
  StepResult result;
  result.states.resize(K);
  result.inputs.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& params = scenario.followers[k].params;
    const Vec2 rate = filtered_input_rate(rec.nominal_rates[k], rec.biases[k]);
    const BicycleInput raw = BicycleInput::from_vector(inputs[k].as_vector() + scenario.dt * rate);
    const BicycleInput clamped = clamp_input(raw, params);
    rec.clamp_active[k] = !(raw == clamped);
    result.inputs[k] = clamped;
    result.states[k] = BicycleState::from_vector(
        states[k].as_vector() + scenario.dt * bicycle_derivative(states[k], inputs[k], params));
  }

  // (7) diagnostics.
  const double kv = scenario.safety.k_v;
  rec.distances.resize(K);
  rec.min_safe_distances.resize(K);
  for (std::size_t i = 1; i <= K; ++i) {
    const Vec2 front = i == 1 ? rec.leader_position : output(states[i - 2]);
    rec.distances[i - 1] = (output(states[i - 1]) - front).norm();
    const double speed = i == 1 ? states[0].V : std::max(states[i - 2].V, states[i - 1].V);
    rec.min_safe_distances[i - 1] = kv * speed;
  }
  rec.local_errors = local_consensus_errors(outputs, scenario.topology);
  rec.lyapunov = lyapunov_value(outputs);
  rec.prediction_gaps.assign(K, std::numeric_limits<double>::quiet_NaN());

  result.record = std::move(rec);
  return result;
}

TrajectoryLog run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  TrajectoryLog log;
  log.scenario_fingerprint = fingerprint(scenario);
  log.reference_rate_bound = reference_rate_bound(scenario.reference, scenario.t_end);

  const std::size_t K = scenario.followers.size();
  std::vector<BicycleState> states(K);
  std::vector<BicycleInput> inputs(K);
  for (std::size_t k = 0; k < K; ++k) {
    states[k] = scenario.followers[k].initial_state;
    inputs[k] = scenario.followers[k].initial_input;
  }

  const std::size_t n = scenario.step_count();
  log.records.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) * scenario.dt;
    try {
      auto result = step(states, inputs, t, scenario, options);
      states = std::move(result.states);
      inputs = std::move(result.inputs);
      log.records.push_back(std::move(result.record));
    } catch (const SimulationError& e) {
      log.status = e.status();
      log.failed_step = s;
      log.message = "step " + std::to_string(s) + " (t=" + std::to_string(t) + "): " + e.what();
      break;
    }
  }
  log.final_states = states;
  log.final_inputs = inputs;

  // Prediction gap: compare y_hat(t + T) made at record s with the realised
  // output `lag` steps later.
  const auto lag = static_cast<std::size_t>(std::llround(scenario.predictor.horizon / scenario.dt));
  const bool have_final = log.status == TerminationStatus::completed;
  for (std::size_t s = 0; s < log.records.size(); ++s) {
    const std::size_t target = s + lag;
    const std::vector<BicycleState>* realised = nullptr;
    if (target < log.records.size()) {
      realised = &log.records[target].states;
    } else if (target == log.records.size() && have_final) {
      realised = &log.final_states;
    }
    if (!realised) continue;
    auto& rec = log.records[s];
    for (std::size_t k = 0; k < K; ++k) {
      rec.prediction_gaps[k] = (rec.predictions[k] - output((*realised)[k])).norm();
    }
  }
  return log;
}

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_bits(const Vec2& a, const Vec2& b) { return same_bits(a[0], b[0]) && same_bits(a[1], b[1]); }

bool same_bits(const BicycleState& a, const BicycleState& b) {
  return same_bits(a.z1, b.z1) && same_bits(a.z2, b.z2) && same_bits(a.V, b.V) &&
         same_bits(a.psi, b.psi);
}

bool same_bits(const BicycleInput& a, const BicycleInput& b) {
  return same_bits(a.a, b.a) && same_bits(a.gamma, b.gamma);
}

bool same_bits(const ConstraintRecord& a, const ConstraintRecord& b) {
  return a.follower == b.follower && a.neighbor == b.neighbor && same_bits(a.h1, b.h1) &&
         same_bits(a.h2, b.h2) && same_bits(a.range_rate, b.range_rate);
}

bool same_bits(bool a, bool b) { return a == b; }

bool same_bits(const StepRecord& a, const StepRecord& b);

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!same_bits(static_cast<T>(a[k]), static_cast<T>(b[k]))) return false;
  }
  return true;
}

bool same_bits(const StepRecord& a, const StepRecord& b) {
  return same_bits(a.t, b.t) && same_bits(a.leader_position, b.leader_position) &&
         same_bits(a.states, b.states) && same_bits(a.inputs, b.inputs) &&
         same_bits(a.predictions, b.predictions) && same_bits(a.nominal_rates, b.nominal_rates) &&
         same_bits(a.biases, b.biases) && same_bits(a.constraints, b.constraints) &&
         same_bits(a.distances, b.distances) &&
         same_bits(a.min_safe_distances, b.min_safe_distances) &&
         same_bits(a.local_errors, b.local_errors) && same_bits(a.lyapunov, b.lyapunov) &&
         same_bits(a.prediction_gaps, b.prediction_gaps) &&
         same_bits(a.clamp_active, b.clamp_active);
}

}  // namespace

bool bitwise_equal(const TrajectoryLog& a, const TrajectoryLog& b) {
  return a.scenario_fingerprint == b.scenario_fingerprint && a.status == b.status &&
         a.failed_step == b.failed_step && a.message == b.message &&
         same_bits(a.reference_rate_bound, b.reference_rate_bound) &&
         same_bits(a.final_states, b.final_states) && same_bits(a.final_inputs, b.final_inputs) &&
         same_bits(a.records, b.records);
}

Summary summarize(const TrajectoryLog& log) {
  if (log.records.empty()) throw std::invalid_argument("summarize: empty log");
  Summary out;
  out.status = log.status;
  out.steps = log.records.size();
  out.reference_rate_bound = log.reference_rate_bound;
  out.final_lyapunov = log.records.back().lyapunov;

  const std::size_t K = log.records.front().states.size();
  out.pair_min_margins.assign(K, std::numeric_limits<double>::infinity());
  out.activation_counts.assign(K, 0);
  out.steady_state_local_errors.assign(K, 0.0);
  std::vector<bool> was_active(K, false);

  const std::size_t n = log.records.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& rec = log.records[s];
    for (std::size_t p = 0; p < K; ++p) {
      const double margin = rec.distances[p] - rec.min_safe_distances[p];
      out.pair_min_margins[p] = std::min(out.pair_min_margins[p], margin);
      if (p > 0) out.min_safety_margin = std::min(out.min_safety_margin, margin);
    }
    for (std::size_t k = 0; k < K; ++k) {
      const bool active = rec.biases[k].norm() > kActivationThreshold;
      if (active && !was_active[k]) ++out.activation_counts[k];
      was_active[k] = active;
      if (active && rec.clamp_active[k]) ++out.clamp_while_constrained;
      if (s >= n - tail) out.steady_state_local_errors[k] += rec.local_errors[k];
      if (!std::isnan(rec.prediction_gaps[k])) {
        out.max_prediction_gap = std::max(out.max_prediction_gap, rec.prediction_gaps[k]);
      }
    }
  }
  for (auto& e : out.steady_state_local_errors) e /= static_cast<double>(tail);
  out.steady_state_local_error =
      std::accumulate(out.steady_state_local_errors.begin(), out.steady_state_local_errors.end(),
                      0.0) /
      static_cast<double>(K);
  return out;
}

}  // namespace safe_consensus
