#include "safe_consensus/export.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>

namespace safe_consensus {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

/// Maps data coordinates into a fixed SVG viewport with a margin for axes.
class Canvas {
 public:
  static constexpr double width = 900, height = 640, margin = 60;

  Canvas(double xmin, double xmax, double ymin, double ymax, bool equal_aspect) {
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double pad_x = 0.03 * (xmax - xmin), pad_y = 0.03 * (ymax - ymin);
    x0_ = xmin - pad_x;
    x1_ = xmax + pad_x;
    y0_ = ymin - pad_y;
    y1_ = ymax + pad_y;
    sx_ = (width - 2 * margin) / (x1_ - x0_);
    sy_ = (height - 2 * margin) / (y1_ - y0_);
    if (equal_aspect) {
      const double s = std::min(sx_, sy_);
      // Re-centre the tighter axis.
      const double cx = 0.5 * (x0_ + x1_), cy = 0.5 * (y0_ + y1_);
      x0_ = cx - 0.5 * (width - 2 * margin) / s;
      x1_ = cx + 0.5 * (width - 2 * margin) / s;
      y0_ = cy - 0.5 * (height - 2 * margin) / s;
      y1_ = cy + 0.5 * (height - 2 * margin) / s;
      sx_ = sy_ = s;
    }
  }

  double px(double x) const { return margin + (x - x0_) * sx_; }
  double py(double y) const { return height - margin - (y - y0_) * sy_; }

  void open(std::ostream& out, const std::string& title, const std::string& xlabel,
            const std::string& ylabel) const {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << title << "</text>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
        << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
      const double xv = x0_ + (x1_ - x0_) * k / 5.0;
      const double yv = y0_ + (y1_ - y0_) * k / 5.0;
      out << "<text x=\"" << px(xv) << "\" y=\"" << height - margin + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << num(std::round(xv * 10) / 10) << "</text>\n";
      out << "<text x=\"" << margin - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << num(std::round(yv * 10) / 10) << "</text>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << ylabel
        << "</text>\n";
  }

  void polyline(std::ostream& out, const std::vector<Vec2>& pts, const char* stroke,
                bool dashed) const {
    if (pts.empty()) return;
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.3\""
        << (dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (const auto& p : pts) out << num(px(p[0])) << ',' << num(py(p[1])) << ' ';
    out << "\"/>\n";
  }

  void marker(std::ostream& out, const Vec2& p, const char* fill) const {
    out << "<circle cx=\"" << num(px(p[0])) << "\" cy=\"" << num(py(p[1]))
        << "\" r=\"4\" fill=\"" << fill << "\" stroke=\"black\"/>\n";
  }

  void legend(std::ostream& out, std::size_t row, const std::string& label, const char* stroke,
              bool dashed) const {
    const double y = margin + 16 + 16 * static_cast<double>(row);
    const double x = width - margin - 150;
    out << "<line x1=\"" << x << "\" y1=\"" << y - 4 << "\" x2=\"" << x + 24 << "\" y2=\""
        << y - 4 << "\" stroke=\"" << stroke << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    out << "<text x=\"" << x + 30 << "\" y=\"" << y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
  }

 private:
  double x0_, x1_, y0_, y1_, sx_, sy_;
};

/// Keep at most ~2000 vertices per curve; the last record is always kept.
std::vector<std::size_t> sample_indices(std::size_t n) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t stride = std::max<std::size_t>(1, n / 2000);
  for (std::size_t s = 0; s < n; s += stride) idx.push_back(s);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace

std::vector<std::string> csv_header(std::size_t K) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= K; ++i) {
    for (const char* f : {"z1", "z2", "V", "psi", "a", "gamma", "w_a", "w_gamma"}) {
      cols.push_back(std::string(f) + "_" + std::to_string(i));
    }
  }
  for (std::size_t k = 1; k <= K; ++k) {
    cols.push_back("dist_" + std::to_string(k));
    cols.push_back("min_safe_dist_" + std::to_string(k));
  }
  for (std::size_t i = 1; i <= K; ++i) cols.push_back("local_err_" + std::to_string(i));
  cols.push_back("lyapunov");
  return cols;
}

void write_csv(std::ostream& out, const TrajectoryLog& log) {
  const std::size_t K = log.final_states.size();
  const auto header = csv_header(K);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& rec : log.records) {
    std::string line = num(rec.t);
    auto put = [&line](double v) {
      line += ',';
      line += num(v);
    };
    for (std::size_t k = 0; k < K; ++k) {
      const auto& x = rec.states[k];
      const auto& u = rec.inputs[k];
      for (double v : {x.z1, x.z2, x.V, x.psi, u.a, u.gamma, rec.biases[k][0], rec.biases[k][1]}) {
        put(v);
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      put(rec.distances[k]);
      put(rec.min_safe_distances[k]);
    }
    for (std::size_t k = 0; k < K; ++k) put(rec.local_errors[k]);
    put(rec.lyapunov);
    line += '\n';
    out << line;
  }
}

void write_summary(std::ostream& out, const Scenario& scenario, const TrajectoryLog& log,
                   const Summary& s) {
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016" PRIx64, log.scenario_fingerprint);
  out << "scenario = " << scenario.name << '\n';
  out << "fingerprint = " << fp << '\n';
  out << "status = " << to_string(s.status) << '\n';
  if (s.status != TerminationStatus::completed) {
    out << "failed_step = " << log.failed_step << '\n';
    out << "message = " << log.message << '\n';
  }
  out << "safety_enabled = " << (scenario.safety_enabled ? "true" : "false") << '\n';
  out << "steps = " << s.steps << '\n';
  out << "t_last = " << num(log.records.back().t) << '\n';
  out << "min_safety_margin_m = " << num(s.min_safety_margin) << '\n';
  for (std::size_t k = 0; k < s.pair_min_margins.size(); ++k) {
    out << "pair_min_margin_m." << k << '_' << k + 1 << " = " << num(s.pair_min_margins[k])
        << '\n';
  }
  for (std::size_t k = 0; k < s.activation_counts.size(); ++k) {
    out << "activations." << k + 1 << " = " << s.activation_counts[k] << '\n';
  }
  out << "steady_state_local_error_m = " << num(s.steady_state_local_error) << '\n';
  for (std::size_t k = 0; k < s.steady_state_local_errors.size(); ++k) {
    out << "steady_state_local_error_m." << k + 1 << " = " << num(s.steady_state_local_errors[k])
        << '\n';
  }
  out << "clamp_while_constrained_steps = " << s.clamp_while_constrained << '\n';
  out << "max_prediction_gap_m = " << num(s.max_prediction_gap) << '\n';
  out << "reference_rate_bound_mps = " << num(s.reference_rate_bound) << '\n';
  out << "final_lyapunov_m2 = " << num(s.final_lyapunov) << '\n';
}

void write_trajectory_svg(std::ostream& out, const TrajectoryLog& log) {
  const std::size_t K = log.final_states.size();
  const auto idx = sample_indices(log.records.size());
  std::vector<std::vector<Vec2>> paths(K + 1);
  for (std::size_t s : idx) {
    const auto& rec = log.records[s];
    paths[0].push_back(rec.leader_position);
    for (std::size_t k = 0; k < K; ++k) paths[k + 1].push_back(output(rec.states[k]));
  }
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& path : paths) {
    for (const auto& p : path) {
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  }
  if (idx.empty()) xmin = xmax = ymin = ymax = 0.0;
  const Canvas canvas(xmin, xmax, ymin, ymax, true);
  canvas.open(out, "Planar paths", "z1 [m]", "z2 [m]");
  canvas.polyline(out, paths[0], "black", true);
  canvas.legend(out, 0, "reference", "black", true);
  for (std::size_t k = 1; k <= K; ++k) {
    canvas.polyline(out, paths[k], colour(k - 1), false);
    canvas.legend(out, k, "follower " + std::to_string(k), colour(k - 1), false);
  }
  for (std::size_t k = 0; k <= K; ++k) {
    if (!paths[k].empty()) canvas.marker(out, paths[k].front(), k ? colour(k - 1) : "black");
  }
  out << "</svg>\n";
}

void write_distances_svg(std::ostream& out, const TrajectoryLog& log) {
  const std::size_t K = log.final_states.size();
  const auto idx = sample_indices(log.records.size());
  std::vector<std::vector<Vec2>> dist(K), safe(K);
  double ymax = 0.0;
  for (std::size_t s : idx) {
    const auto& rec = log.records[s];
    for (std::size_t k = 0; k < K; ++k) {
      dist[k].push_back({rec.t, rec.distances[k]});
      safe[k].push_back({rec.t, rec.min_safe_distances[k]});
      ymax = std::max({ymax, rec.distances[k], rec.min_safe_distances[k]});
    }
  }
  const double t0 = idx.empty() ? 0.0 : log.records.front().t;
  const double t1 = idx.empty() ? 1.0 : log.records.back().t;
  const Canvas canvas(t0, t1, 0.0, ymax, false);
  canvas.open(out, "Inter-agent distance (solid) and minimum safe distance (dashed)", "t [s]",
              "[m]");
  for (std::size_t k = 0; k < K; ++k) {
    const char* c = colour(k);
    canvas.polyline(out, dist[k], c, false);
    canvas.polyline(out, safe[k], c, true);
    canvas.legend(out, k, "pair " + std::to_string(k) + "-" + std::to_string(k + 1), c, false);
  }
  out << "</svg>\n";
}

}  // namespace safe_consensus
