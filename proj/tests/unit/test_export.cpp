#include <doctest.h>

#include <cmath>
#include <sstream>

#include "safe_consensus/export.hpp"

using namespace safe_consensus;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("csv header layout") {
  const auto h = csv_header(2);
  CHECK(h.size() == 1 + 2 * 8 + 2 * 2 + 2 + 1);
  CHECK(h.front() == "t");
  CHECK(h[1] == "z1_1");
  CHECK(h[8] == "w_gamma_1");
  CHECK(h[9] == "z1_2");
  CHECK(h[17] == "dist_1");
  CHECK(h[18] == "min_safe_dist_1");
  CHECK(h[21] == "local_err_1");
  CHECK(h.back() == "lyapunov");
}

TEST_CASE("csv rows round trip through text") {
  Scenario s = paper_platoon_scenario();
  s.t_end = 3.0;
  const auto log = run(s);
  std::ostringstream out;
  write_csv(out, log);
  const std::string text = out.str();
  CHECK(text.find('\r') == std::string::npos);

  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  CHECK(header == csv_header(5));
  std::size_t rows = 0;
  double lowest_margin = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    const auto& rec = log.records[rows];
    CHECK(std::stod(cells[0]) == doctest::Approx(rec.t));
    const double z1 = std::stod(cells[1 + 8 * 2]);
    CHECK(std::abs(z1 - rec.states[2].z1) <= 1e-8 * std::max(1.0, std::abs(z1)));
    for (std::size_t p = 1; p < 5; ++p) {
      const double d = std::stod(cells[41 + 2 * p]), m = std::stod(cells[42 + 2 * p]);
      lowest_margin = std::min(lowest_margin, d - m);
    }
    ++rows;
  }
  CHECK(rows == log.records.size());
  // Metrics from the text agree with the in-memory summary.
  const auto sum = summarize(log);
  CHECK(std::abs(lowest_margin - sum.min_safety_margin) <=
        1e-6 * std::max(1.0, std::abs(sum.min_safety_margin)));
}

TEST_CASE("summary and plots") {
  Scenario s = paper_platoon_scenario();
  s.t_end = 1.0;
  const auto log = run(s);
  std::ostringstream sum, traj, dist;
  write_summary(sum, s, log, summarize(log));
  CHECK(sum.str().find("status = completed") != std::string::npos);
  CHECK(sum.str().find("min_safety_margin_m = ") != std::string::npos);
  CHECK(sum.str().find("activations.5 = ") != std::string::npos);
  write_trajectory_svg(traj, log);
  write_distances_svg(dist, log);
  for (const auto* svg : {&traj, &dist}) {
    const std::string t = svg->str();
    CHECK(t.rfind("<svg", 0) == 0);
    CHECK(t.find("</svg>") != std::string::npos);
    CHECK(t.find("nan") == std::string::npos);
  }
  CHECK(traj.str().find("<circle") != std::string::npos);
  CHECK(dist.str().find("stroke-dasharray") != std::string::npos);
}
