#include "safe_consensus/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/QR>

#include "safe_consensus/consensus.hpp"
#include "safe_consensus/graph.hpp"
#include "safe_consensus/predictor.hpp"
#include "safe_consensus/sim.hpp"

namespace safe_consensus::verify {

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
  }

 private:
  std::mt19937_64 gen_;
};

bool exactly_feasible(const Vec2& w, std::span<const HalfspaceConstraint> constraints) {
  for (const auto& c : constraints) {
    if (c.normal.dot(w) < c.offset) return false;
  }
  return true;
}

/// Stationarity 2 Q w = sum lambda_i a_i over the active constraints with
/// lambda >= 0. Returns the worst violation (0 when certified).
double kkt_violation(double q1, double q2, const Vec2& w,
                     std::span<const HalfspaceConstraint> constraints) {
  const Vec2 grad(2.0 * q1 * w[0], 2.0 * q2 * w[1]);
  std::vector<Vec2> active;
  for (const auto& c : constraints) {
    const double scale = std::max({1.0, std::abs(c.offset), c.normal.norm() * w.norm()});
    if (std::abs(c.slack(w)) <= 1e-9 * scale) active.push_back(c.normal);
  }
  const double gscale = std::max(1.0, grad.norm());
  if (active.empty()) return grad.norm() / gscale;
  Eigen::MatrixXd A(2, active.size());
  for (std::size_t k = 0; k < active.size(); ++k) A.col(k) = active[k];
  const Eigen::VectorXd lambda = A.completeOrthogonalDecomposition().solve(grad);
  const double residual = (A * lambda - grad).norm() / gscale;
  const double negative = std::max(0.0, -lambda.minCoeff()) / gscale;
  return std::max(residual, negative);
}

}  // namespace

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void Report::add(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok, std::move(detail)});
}

std::optional<GridOptimum> grid_oracle(double q1, double q2,
                                       std::span<const HalfspaceConstraint> constraints,
                                       double step) {
  const auto n = static_cast<long>(std::llround(50.0 / step));
  std::optional<GridOptimum> best;
  for (long i = -n; i <= n; ++i) {
    const double w1 = static_cast<double>(i) * step;
    double lo = -50.0, hi = 50.0;
    bool row_ok = true;
    for (const auto& c : constraints) {
      const double rest = c.offset - c.normal[0] * w1;
      if (c.normal[1] > 0.0) {
        lo = std::max(lo, rest / c.normal[1]);
      } else if (c.normal[1] < 0.0) {
        hi = std::min(hi, rest / c.normal[1]);
      } else if (rest > 0.0) {
        row_ok = false;
      }
    }
    if (!row_ok) continue;
    // One grid point of slack on each side absorbs rounding in the bounds;
    // exact feasibility is decided below.
    const long kmin = std::max(-n, static_cast<long>(std::ceil(lo / step)) - 1);
    const long kmax = std::min(n, static_cast<long>(std::floor(hi / step)) + 1);
    if (kmin > kmax) continue;
    const long centre = std::clamp(0L, kmin, kmax);
    std::optional<Vec2> row_best;
    for (long d = 0; d <= 2 && !row_best; ++d) {
      for (long k : {centre - d, centre + d}) {
        if (k < kmin || k > kmax) continue;
        const Vec2 w(w1, static_cast<double>(k) * step);
        if (!exactly_feasible(w, constraints)) continue;
        if (!row_best || std::abs(w[1]) < std::abs((*row_best)[1])) row_best = w;
      }
    }
    if (!row_best) continue;
    const double value = q1 * w1 * w1 + q2 * (*row_best)[1] * (*row_best)[1];
    if (!best || value < best->objective) best = GridOptimum{*row_best, value};
  }
  return best;
}

Report qp_suite(std::size_t instances, std::uint64_t seed) {
  Report report{"qp", {}};
  Rng rng(seed);
  std::size_t ok_slack = 0, ok_objective = 0, ok_kkt = 0, both_infeasible = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_kkt = 0.0;
  std::size_t generated = 0;
  std::array<std::size_t, 3> by_size{};

  while (generated < instances) {
    const double q1 = rng.log_uniform(0.1, 1000.0);
    const double q2 = rng.log_uniform(0.1, 1000.0);
    const double u = rng.uniform(0.0, 1.0);
    const std::size_t m = u < 0.1 ? 0 : (u < 0.4 ? 1 : 2);

    // A known feasible point bounds the optimum, which must sit in the grid box.
    const Vec2 anchor(rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0));
    const double anchor_value = q1 * anchor[0] * anchor[0] + q2 * anchor[1] * anchor[1];
    if (std::sqrt(anchor_value / q1) > 49.0 || std::sqrt(anchor_value / q2) > 49.0) continue;

    std::vector<HalfspaceConstraint> cons;
    for (std::size_t k = 0; k < m; ++k) {
      const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
      const double mag = rng.log_uniform(0.1, 10.0);
      HalfspaceConstraint c;
      c.normal = mag * Vec2(std::cos(angle), std::sin(angle));
      c.offset = c.normal.dot(anchor) - rng.uniform(0.0, 10.0) * mag;
      cons.push_back(c);
    }
    ++generated;
    ++by_size[m];

    const Vec2 w = solve_weighted_qp(q1, q2, cons);
    double slack = std::numeric_limits<double>::infinity();
    for (const auto& c : cons) slack = std::min(slack, c.slack(w));
    if (cons.empty()) slack = 0.0;
    worst_slack = std::min(worst_slack, slack);
    if (slack >= -1e-9) ++ok_slack;

    const auto grid = grid_oracle(q1, q2, cons);
    const double value = q1 * w[0] * w[0] + q2 * w[1] * w[1];
    const double excess = grid ? value - grid->objective : std::numeric_limits<double>::infinity();
    worst_excess = std::max(worst_excess, excess);
    if (grid && excess <= 1e-4) ++ok_objective;

    const double kkt = kkt_violation(q1, q2, w, cons);
    worst_kkt = std::max(worst_kkt, kkt);
    if (kkt <= 1e-7) ++ok_kkt;
  }

  report.add("feasibility", ok_slack == instances,
             fmt("%zu/%zu instances with slack >= -1e-9 (worst %.3g; sizes 0/1/2: %zu/%zu/%zu)",
                 ok_slack, instances, worst_slack, by_size[0], by_size[1], by_size[2]));
  report.add("grid-oracle", ok_objective == instances,
             fmt("%zu/%zu objectives within 1e-4 of the 0.01 grid optimum (worst excess %.3g)",
                 ok_objective, instances, worst_excess));
  report.add("kkt", ok_kkt == instances,
             fmt("%zu/%zu solutions satisfy stationarity with nonnegative multipliers "
                 "(worst %.3g)",
                 ok_kkt, instances, worst_kkt));

  // Contradictory pairs: a.w >= b1 and -a.w >= b2 with b1 + b2 > 0.
  const std::size_t infeasible_cases = 20;
  for (std::size_t k = 0; k < infeasible_cases; ++k) {
    const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Vec2 a = rng.log_uniform(0.1, 10.0) * Vec2(std::cos(angle), std::sin(angle));
    const double b1 = rng.uniform(-5.0, 5.0);
    const double b2 = -b1 + rng.uniform(0.1, 5.0);
    std::vector<HalfspaceConstraint> cons{{a, b1}, {-a, b2}};
    bool solver_rejects = false;
    try {
      (void)solve_weighted_qp(1.0, 1.0, cons);
    } catch (const QpInfeasible&) {
      solver_rejects = true;
    }
    if (solver_rejects && !grid_oracle(1.0, 1.0, cons)) ++both_infeasible;
  }
  report.add("infeasible-agreement", both_infeasible == infeasible_cases,
             fmt("%zu/%zu contradictory instances rejected by both solver and grid",
                 both_infeasible, infeasible_cases));
  return report;
}

Report jacobian_suite(std::uint64_t seed) {
  Report report{"jacobian", {}};
  Rng rng(seed);
  const PredictorConfig cfg;
  const double T = cfg.horizon;

  // Straight-line motion under constant acceleration when gamma = 0.
  double worst_pos = 0.0, worst_jac = 0.0;
  for (int n = 0; n < 100; ++n) {
    const BicycleParams p{rng.uniform(0.8, 2.0), rng.uniform(0.8, 2.0)};
    const BicycleState x{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0),
                         rng.uniform(0.5, 15.0), rng.uniform(-std::numbers::pi, std::numbers::pi)};
    const BicycleInput u{rng.uniform(-2.0, 2.0), 0.0};
    const Vec2 heading(std::cos(x.psi), std::sin(x.psi));
    const double travel = x.V * T + 0.5 * u.a * T * T;
    const Vec2 exact = output(x) + travel * heading;
    worst_pos = std::max(worst_pos, (predict_output(x, u, p, cfg) - exact).norm());

    // d/da moves along the heading; d/dgamma rotates the whole arc, which
    // also turns the heading at rate V/Lr.
    Mat2 J;
    J.col(0) = 0.5 * T * T * heading;
    J.col(1) = (travel + travel * travel / (2.0 * p.Lr)) * Vec2(-heading[1], heading[0]);
    const Mat2 fd = predict_jacobian_u(x, u, p, cfg);
    worst_jac = std::max(worst_jac, (fd - J).cwiseAbs().maxCoeff() / std::max(1.0, J.norm()));
  }
  report.add("straight-line", worst_pos <= 1e-6,
             fmt("100 gamma=0 predictions, worst deviation %.3g m (limit 1e-6)", worst_pos));
  report.add("straight-line-jacobian", worst_jac <= 1e-5,
             fmt("100 gamma=0 Jacobians vs closed form, worst relative error %.3g (limit 1e-5)",
                 worst_jac));

  // Richardson: halving the step should quarter the central-difference error.
  const std::array<double, 3> steps{1e-2, 5e-3, 2.5e-3};
  const double floor = 1e-9;
  std::size_t entries = 0, in_band = 0, floored = 0;
  double lo_ratio = std::numeric_limits<double>::infinity(), hi_ratio = 0.0;
  for (int n = 0; n < 50; ++n) {
    const BicycleParams p{rng.uniform(0.8, 2.0), rng.uniform(0.8, 2.0)};
    const BicycleState x{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0),
                         rng.uniform(0.5, 15.0), rng.uniform(-std::numbers::pi, std::numbers::pi)};
    const BicycleInput u{rng.uniform(-2.0, 2.0), rng.uniform(-0.5, 0.5)};
    std::array<Mat2, 3> D;
    for (std::size_t k = 0; k < 3; ++k) D[k] = predict_jacobian_u(x, u, p, cfg, steps[k]);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        ++entries;
        const double coarse = D[0](r, c) - D[1](r, c);
        const double fine = D[1](r, c) - D[2](r, c);
        if (std::abs(coarse) < floor && std::abs(fine) < floor) {
          ++floored;
          ++in_band;
          continue;
        }
        const double ratio = coarse / fine;
        lo_ratio = std::min(lo_ratio, ratio);
        hi_ratio = std::max(hi_ratio, ratio);
        if (ratio >= 3.0 && ratio <= 5.0) ++in_band;
      }
    }
  }
  report.add("richardson", in_band == entries,
             fmt("%zu/%zu entries with error ratio in [3, 5] (range %.3f..%.3f, %zu below the "
                 "1e-9 floor)",
                 in_band, entries, lo_ratio, hi_ratio, floored));
  return report;
}

Report graph_suite() {
  Report report{"graph", {}};
  for (std::size_t K = 1; K <= 10; ++K) {
    const auto L = laplacian(path_graph(K));
    const std::size_t rank = numerical_rank(L);
    const double row_sum = (L * Eigen::VectorXd::Ones(K + 1)).norm();
    report.add(fmt("path-%zu", K), rank == K && row_sum <= 1e-12 && has_rooted_out_branching(L),
               fmt("rank %zu (want %zu), |L 1| = %.3g", rank, K, row_sum));
  }
  // Two chains, only the first hears the leader.
  for (std::size_t K = 2; K <= 10; ++K) {
    const std::size_t split = K / 2;
    Topology t;
    t.neighbors.resize(K + 1);
    for (std::size_t i = 1; i <= K; ++i) {
      const bool first = i <= split;
      const std::size_t lo = first ? 1 : split + 1;
      const std::size_t hi = first ? split : K;
      if (i == 1) t.neighbors[i].push_back(0);
      if (i > lo) t.neighbors[i].push_back(i - 1);
      if (i < hi) t.neighbors[i].push_back(i + 1);
    }
    const auto L = laplacian(t);
    const std::size_t rank = numerical_rank(L);
    report.add(fmt("split-%zu", K), rank < K && !has_rooted_out_branching(L),
               fmt("chains 1..%zu and %zu..%zu: rank %zu (want < %zu)", split, split + 1, K, rank,
                   K));
  }
  return report;
}

namespace {

std::vector<BicycleState> terminal_states(Scenario s, double dt) {
  s.dt = dt;
  s.t_end = 10.0;
  const auto log = run(s);
  if (log.status != TerminationStatus::completed) return {};
  return log.final_states;
}

double position_error(const std::vector<BicycleState>& a, const std::vector<BicycleState>& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, (output(a[k]) - output(b[k])).norm());
  return e;
}

}  // namespace

Report euler_suite() {
  Report report{"euler", {}};
  // The five-follower prefix saturates and switches the filter within the
  // first second, which makes its terminal state jump with dt. One follower
  // starting 5.8 m off the reference stays on the smooth branch.
  Scenario base = paper_platoon_scenario();
  base.name = "euler_single_follower";
  base.followers.resize(1);
  base.followers[0].initial_state.z1 = -55.0;
  base.followers[0].initial_state.z2 = -63.0;
  base.topology = path_graph(1);
  base.speedups.alpha = {10.0};
  const double dt = base.dt;
  const auto coarse = terminal_states(base, dt);
  const auto half = terminal_states(base, dt / 2);
  const auto reference = terminal_states(base, dt / 8);
  if (coarse.empty() || half.empty() || reference.empty()) {
    report.add("order", false, "a 10 s prefix run did not complete");
    return report;
  }
  const double e1 = position_error(coarse, reference);
  const double e2 = position_error(half, reference);
  const double ratio = e1 / e2;
  report.add("order", ratio >= 1.5 && ratio <= 2.5,
             fmt("one follower, 10 s prefix: error(dt)=%.4g m, error(dt/2)=%.4g m vs dt/8, ratio %.3f (want "
                 "[1.5, 2.5])",
                 e1, e2, ratio));
  return report;
}

Report alpha_sweep_suite(double t_end) {
  Report report{"alpha-sweep", {}};
  const std::array<double, 3> alphas{5.0, 10.0, 20.0};
  std::array<double, 3> err{};
  bool all_completed = true;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    Scenario s = paper_platoon_scenario();
    s.t_end = t_end;
    s.speedups.alpha.assign(s.followers.size(), alphas[k]);
    const auto log = run(s, {.parallel = true});
    const auto sum = summarize(log);
    err[k] = sum.steady_state_local_error;
    const bool done = log.status == TerminationStatus::completed;
    all_completed = all_completed && done;
    report.add(fmt("alpha-%g", alphas[k]), done,
               fmt("status %s, steady-state local error %.6g m",
                   std::string(to_string(log.status)).c_str(), err[k]));
  }
  const bool ordered = all_completed && err[0] > err[1] && err[1] > err[2];
  report.add("ordering", ordered,
             fmt("e(5)=%.6g > e(10)=%.6g > e(20)=%.6g required", err[0], err[1], err[2]));
  return report;
}

Report barrier_suite(std::size_t points, std::uint64_t seed) {
  Report report{"barrier", {}};
  Rng rng(seed);
  const SafetyConfig cfg;
  double worst_x = 0.0, worst_u = 0.0;
  std::size_t passed = 0;
  for (std::size_t n = 0; n < points; ++n) {
    const BicycleState x{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0),
                         rng.uniform(0.1, 15.0), rng.uniform(-std::numbers::pi, std::numbers::pi)};
    const BicycleInput u{rng.uniform(-2.0, 2.0), rng.uniform(-0.5, 0.5)};
    const Vec2 other(rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0));
    const auto at = [&](const BicycleState& xs, const BicycleInput& us) {
      return barrier_eval(xs, us, other, Vec2::Zero(), cfg).h2;
    };
    const auto b = barrier_eval(x, u, other, Vec2::Zero(), cfg);

    Vec4 fd_x;
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(x.as_vector()[k]));
      Vec4 plus = x.as_vector(), minus = x.as_vector();
      plus[k] += h;
      minus[k] -= h;
      fd_x[k] = (at(BicycleState::from_vector(plus), u) - at(BicycleState::from_vector(minus), u)) /
                (2.0 * h);
    }
    Vec2 fd_u;
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-6;
      Vec2 plus = u.as_vector(), minus = u.as_vector();
      plus[k] += h;
      minus[k] -= h;
      fd_u[k] = (at(x, BicycleInput::from_vector(plus)) - at(x, BicycleInput::from_vector(minus))) /
                (2.0 * h);
    }
    const double ex = (fd_x - b.grad_x_h2).cwiseAbs().maxCoeff() /
                      std::max(1.0, b.grad_x_h2.cwiseAbs().maxCoeff());
    const double eu = (fd_u - b.grad_u_h2).cwiseAbs().maxCoeff() /
                      std::max(1.0, b.grad_u_h2.cwiseAbs().maxCoeff());
    worst_x = std::max(worst_x, ex);
    worst_u = std::max(worst_u, eu);
    if (ex <= 1e-5 && eu <= 1e-5) ++passed;
  }
  report.add("gradients", passed == points,
             fmt("%zu/%zu points within 1e-5 relative (worst state %.3g, input %.3g)", passed,
                 points, worst_x, worst_u));
  return report;
}

const std::vector<std::string_view>& suite_names() {
  static const std::vector<std::string_view> names{"qp", "jacobian", "graph", "euler",
                                                   "alpha-sweep"};
  return names;
}

std::optional<Report> run_suite(std::string_view name) {
  if (name == "qp") return qp_suite();
  if (name == "jacobian") return jacobian_suite();
  if (name == "graph") return graph_suite();
  if (name == "euler") return euler_suite();
  if (name == "alpha-sweep") return alpha_sweep_suite();
  return std::nullopt;
}

}  // namespace safe_consensus::verify
