// Acceptance checks for the platoon reproduction. Prints one PASS/FAIL line
// per criterion; the exit status is the number of failed criteria.
//
//   acceptance              run all criteria
//   acceptance --criterion N run only criterion N (1..9)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "safe_consensus/export.hpp"
#include "safe_consensus/scenario_io.hpp"
#include "safe_consensus/sim.hpp"
#include "safe_consensus/verify.hpp"

namespace sc = safe_consensus;

namespace {

struct Verdict {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "/" : "") + std::to_string(v[k]);
  return s;
}

Verdict from_report(const sc::verify::Report& r, const std::vector<std::string>& names) {
  bool ok = true;
  std::string detail;
  for (const auto& c : r.checks) {
    if (!names.empty() && std::find(names.begin(), names.end(), c.name) == names.end()) continue;
    ok = ok && c.passed;
    detail += (detail.empty() ? "" : "; ") + c.name + ": " + c.detail;
  }
  return {ok, detail};
}

sc::Scenario platoon(double t_end) {
  sc::Scenario s = sc::paper_platoon_scenario();
  s.t_end = t_end;
  return s;
}

Verdict safety_200s() {
  const auto log = sc::run(platoon(200.0));
  const auto sum = sc::summarize(log);
  const bool ok = log.status == sc::TerminationStatus::completed && sum.min_safety_margin >= -0.1;
  return {ok, fmt("status %s, min over follower pairs of distance - k_v V = %.4g m (limit -0.1 m)",
                  std::string(sc::to_string(log.status)).c_str(), sum.min_safety_margin)};
}

Verdict activations_680s() {
  const auto log = sc::run(platoon(680.0), {.parallel = true});
  const auto sum = sc::summarize(log);
  bool ok = log.status == sc::TerminationStatus::completed;
  for (auto c : sum.activation_counts) ok = ok && c >= 4 && c <= 6;
  return {ok, fmt("activation intervals per follower %s (want 5 +/- 1 each), status %s",
                  join_counts(sum.activation_counts).c_str(),
                  std::string(sc::to_string(log.status)).c_str())};
}

Verdict alpha_ordering() {
  const auto r = sc::verify::alpha_sweep_suite(120.0);
  return from_report(r, {"ordering"});
}

Verdict qp_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = sc::verify::qp_suite(1000);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto v = from_report(r, {"feasibility", "grid-oracle"});
  v.passed = v.passed && secs <= 30.0;
  v.detail += fmt("; %.1f s (limit 30 s)", secs);
  return v;
}

Verdict predictor() {
  return from_report(sc::verify::jacobian_suite(), {"straight-line", "richardson"});
}

Verdict barrier_gradients() { return from_report(sc::verify::barrier_suite(1000), {}); }

Verdict graph_structure() {
  const auto r = sc::verify::graph_suite();
  std::size_t passed = 0;
  for (const auto& c : r.checks) passed += c.passed ? 1 : 0;
  return {r.passed(), fmt("%zu/%zu checks (path graphs K=1..10 rank K and |L 1| <= 1e-12; split "
                          "chains rank < K)",
                          passed, r.checks.size())};
}

Verdict counterfactual() {
  sc::Scenario s = sc::load_scenario(SCENARIO_DIR "/collision_course.json");
  const auto filtered = sc::summarize(sc::run(s));
  s.safety_enabled = false;
  const auto log = sc::run(s);
  const auto open = sc::summarize(log);
  const bool ok = log.status == sc::TerminationStatus::completed && open.min_safety_margin < 0.0;
  return {ok, fmt("collision_course without filter: min margin %.4g m (want < 0); with filter: "
                  "%.4g m",
                  open.min_safety_margin, filtered.min_safety_margin)};
}

Verdict determinism() {
  auto csv = [] {
    std::ostringstream out;
    sc::write_csv(out, sc::run(platoon(200.0)));
    return out.str();
  };
  const std::string a = csv();
  const std::string b = csv();
  return {a == b, fmt("two 200 s runs: %zu and %zu CSV bytes, %s", a.size(), b.size(),
                      a == b ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"safety distance over 200 s", safety_200s},
      {"barrier activations over 680 s", activations_680s},
      {"steady-state error ordered in alpha", alpha_ordering},
      {"QP matches grid oracle", qp_oracle},
      {"predictor closed form and Richardson", predictor},
      {"barrier gradients vs finite differences", barrier_gradients},
      {"graph rank structure", graph_structure},
      {"filter is necessary on the collision course", counterfactual},
      {"byte-identical CSV across runs", determinism},
  };

  std::size_t only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    only = std::strtoul(argv[2], nullptr, 10);
    if (only < 1 || only > criteria.size()) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", criteria.size());
      return 64;
    }
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
    return 64;
  }

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && only != k + 1) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu %s: %s  %s\n", k + 1, v.passed ? "PASS" : "FAIL", criteria[k].first,
                v.detail.c_str());
    std::fflush(stdout);
    failures += v.passed ? 0 : 1;
  }
  return failures;
}
