#include "safe_consensus/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace safe_consensus {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vec2 paper_value(double t) {
  if (t <= PaperTrajectory::switch_time) {
    return {-50.0 + 3.75 * t, -60.0 + 4.5 * t};
  }
  const double tau = t - PaperTrajectory::switch_time;
  return {350.0 * std::sin(0.01 * tau), 210.0 * std::sin(0.02 * tau)};
}

Vec2 paper_rate(double t) {
  if (t < PaperTrajectory::switch_time) return {3.75, 4.5};
  const double tau = t - PaperTrajectory::switch_time;
  return {3.5 * std::cos(0.01 * tau), 4.2 * std::cos(0.02 * tau)};
}

const ReferencePiece& active_piece(const ParametricCurve& curve, double t) {
  if (curve.pieces.empty()) throw std::invalid_argument("parametric reference has no pieces");
  auto it = std::upper_bound(curve.pieces.begin(), curve.pieces.end(), t,
                             [](double tv, const ReferencePiece& p) { return tv < p.t_start; });
  if (it == curve.pieces.begin()) return curve.pieces.front();
  return *std::prev(it);
}

}  // namespace

Vec2 ReferencePiece::value(double t) const {
  const double tau = t - t_start;
  Vec2 r = offset + velocity * tau;
  for (int k = 0; k < 2; ++k) r[k] += amplitude[k] * std::sin(frequency[k] * tau + phase[k]);
  return r;
}

Vec2 ReferencePiece::rate(double t) const {
  const double tau = t - t_start;
  Vec2 r = velocity;
  for (int k = 0; k < 2; ++k) {
    r[k] += amplitude[k] * frequency[k] * std::cos(frequency[k] * tau + phase[k]);
  }
  return r;
}

void ParametricCurve::validate() const {
  if (pieces.empty()) throw std::invalid_argument("parametric reference has no pieces");
  if (pieces.front().t_start != 0.0) {
    throw std::invalid_argument("parametric reference must start at t = 0");
  }
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const double t = pieces[k].t_start;
    if (!(t > pieces[k - 1].t_start)) {
      throw std::invalid_argument("parametric reference pieces must be strictly ordered");
    }
    const Vec2 gap = pieces[k].value(t) - pieces[k - 1].value(t);
    if (gap.norm() > 1e-6 * std::max(1.0, pieces[k].value(t).norm())) {
      throw std::invalid_argument("parametric reference is discontinuous at t = " +
                                  std::to_string(t));
    }
  }
}

Vec2 reference_eval(const ReferenceSignal& ref, double t) {
  return std::visit(overloaded{
                        [&](const PaperTrajectory&) { return paper_value(t); },
                        [&](const ConstantPoint& c) { return c.point; },
                        [&](const ParametricCurve& c) { return active_piece(c, t).value(t); },
                    },
                    ref);
}

Vec2 reference_rate(const ReferenceSignal& ref, double t) {
  return std::visit(overloaded{
                        [&](const PaperTrajectory&) { return paper_rate(t); },
                        [&](const ConstantPoint&) -> Vec2 { return Vec2::Zero(); },
                        [&](const ParametricCurve& c) { return active_piece(c, t).rate(t); },
                    },
                    ref);
}

double reference_rate_bound(const ReferenceSignal& ref, double horizon, double sample_step) {
  double bound = 0.0;
  const auto n = static_cast<long>(std::ceil(horizon / sample_step));
  for (long k = 0; k <= n; ++k) {
    const double t = std::min(horizon, static_cast<double>(k) * sample_step);
    bound = std::max(bound, reference_rate(ref, t).norm());
  }
  return bound;
}

}  // namespace safe_consensus
