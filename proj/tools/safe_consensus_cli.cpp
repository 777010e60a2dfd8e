// Command-line front end: run a scenario file or one of the verify suites.
//
// Exit codes: 0 success, 1 unreadable/invalid scenario or overrides,
// 2 simulation aborted, 3 verify failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "safe_consensus/export.hpp"
#include "safe_consensus/scenario_io.hpp"
#include "safe_consensus/sim.hpp"
#include "safe_consensus/verify.hpp"

#ifndef SAFE_CONSENSUS_VERSION
#define SAFE_CONSENSUS_VERSION "0.0.0"
#endif

namespace sc = safe_consensus;
namespace fs = std::filesystem;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitAborted = 2;
constexpr int kExitVerify = 3;

struct RunArgs {
  std::string scenario;
  std::string out = "out";
  std::optional<double> t_end, dt, alpha;
  bool no_safety = false;
  bool parallel = false;
};

template <class Fn>
bool write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  fn(f);
  return static_cast<bool>(f);
}

int cmd_run(const RunArgs& args) {
  sc::Scenario scenario;
  try {
    scenario = sc::load_scenario(args.scenario);
    if (args.t_end) scenario.t_end = *args.t_end;
    if (args.dt) scenario.dt = *args.dt;
    if (args.alpha) scenario.speedups.alpha.assign(scenario.followers.size(), *args.alpha);
    if (args.no_safety) scenario.safety_enabled = false;
    scenario.validate();
  } catch (const sc::ScenarioParseError& e) {
    std::cerr << "error: " << args.scenario << ": " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: override rejected: " << e.what() << "\n";
    return kExitParse;
  }

  const auto log = sc::run(scenario, {.parallel = args.parallel});
  auto report_abort = [&] {
    std::cerr << "simulation aborted: " << sc::to_string(log.status) << " at step "
              << log.failed_step << ": " << log.message << "\n";
    return kExitAborted;
  };
  if (log.records.empty()) return report_abort();
  const auto summary = sc::summarize(log);

  const fs::path out(args.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out << ": " << ec.message() << "\n";
    return kExitParse;
  }
  bool ok = write_file(out / "trajectory.csv", [&](std::ostream& f) { sc::write_csv(f, log); });
  ok = ok && write_file(out / "summary.txt", [&](std::ostream& f) {
         sc::write_summary(f, scenario, log, summary);
       });
  ok = ok && write_file(out / "trajectory.svg",
                        [&](std::ostream& f) { sc::write_trajectory_svg(f, log); });
  ok = ok && write_file(out / "distances.svg",
                        [&](std::ostream& f) { sc::write_distances_svg(f, log); });
  sc::write_summary(std::cout, scenario, log, summary);
  if (!ok) return kExitParse;

  if (log.status != sc::TerminationStatus::completed) return report_abort();
  return 0;
}

int cmd_verify(const std::string& suite) {
  const auto report = sc::verify::run_suite(suite);
  if (!report) {
    std::cerr << "error: unknown suite '" << suite << "'\n";
    return kExitParse;
  }
  for (const auto& c : report->checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << report->suite << "/" << c.name << ": "
              << c.detail << "\n";
  }
  std::cout << report->suite << ": " << (report->passed() ? "all checks passed" : "FAILED")
            << "\n";
  return report->passed() ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive consensus platoon simulator with a barrier safety filter"};
  app.set_version_flag("--version", SAFE_CONSENSUS_VERSION);
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate a scenario file and write CSV, SVG and summary");
  run->add_option("scenario", run_args.scenario, "Scenario JSON file")->required();
  run->add_option("--out", run_args.out, "Output directory")->capture_default_str();
  run->add_option("--t-end", run_args.t_end, "Override the duration [s]");
  run->add_option("--dt", run_args.dt, "Override the integration step [s]");
  run->add_option("--alpha", run_args.alpha, "Override every follower's speedup factor");
  run->add_flag("--no-safety", run_args.no_safety, "Disable the barrier filter");
  run->add_flag("--parallel", run_args.parallel,
                "Evaluate followers concurrently within each step (same output)");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a property suite");
  std::vector<std::string> names(sc::verify::suite_names().begin(),
                                 sc::verify::suite_names().end());
  verify->add_option("suite", suite, "qp | jacobian | graph | euler | alpha-sweep")
      ->required()
      ->check(CLI::IsMember(names));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  if (run->parsed()) return cmd_run(run_args);
  return cmd_verify(suite);
}
