#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string output;
};

Outcome cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "safe_consensus_cli_test.log";
  const std::string cmd = std::string("\"") + CLI_PATH + "\" " + args + " > \"" + log.string() +
                          "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, buf.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double summary_value(const std::string& summary, const std::string& key) {
  const auto at = summary.find(key + " = ");
  REQUIRE(at != std::string::npos);
  return std::stod(summary.substr(at + key.size() + 3));
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("safe_consensus_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("version") {
  const auto r = cli("--version");
  CHECK(r.code == 0);
  CHECK(r.output.find('.') != std::string::npos);
}

TEST_CASE("paper scenario, 60 s") {
  const fs::path out = scratch("paper60");
  const auto r = cli(std::string("run ") + SCENARIO_DIR "/paper_platoon.json --t-end 60 --out " +
                     out.string());
  CHECK(r.code == 0);
  for (const char* f : {"trajectory.csv", "summary.txt", "trajectory.svg", "distances.svg"}) {
    CHECK(fs::exists(out / f));
  }
  const std::string summary = slurp(out / "summary.txt");
  CHECK(summary.find("status = completed") != std::string::npos);
  // Distance stays above k_v V up to the 0.1 m discretisation tolerance.
  CHECK(summary_value(summary, "min_safety_margin_m") >= -0.1);
}

TEST_CASE("collision course without the filter goes unsafe") {
  const fs::path out = scratch("cc");
  auto r = cli(std::string("run ") + SCENARIO_DIR "/collision_course.json --no-safety --out " +
               out.string());
  CHECK(r.code == 0);
  CHECK(summary_value(slurp(out / "summary.txt"), "min_safety_margin_m") < 0.0);
}

TEST_CASE("identical runs write identical csv") {
  const fs::path a = scratch("idem_a"), b = scratch("idem_b");
  const std::string base = std::string("run ") + SCENARIO_DIR "/paper_platoon.json --t-end 5 ";
  REQUIRE(cli(base + "--out " + a.string()).code == 0);
  REQUIRE(cli(base + "--parallel --out " + b.string()).code == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  REQUIRE(cli(base + "--out " + a.string()).code == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("overrides") {
  const fs::path out = scratch("override");
  auto r = cli(std::string("run ") + SCENARIO_DIR "/paper_platoon.json --t-end 0.5 --dt 0.05 "
                                     "--alpha 20 --out " + out.string());
  CHECK(r.code == 0);
  CHECK(summary_value(slurp(out / "summary.txt"), "steps") == 10);
  r = cli(std::string("run ") + SCENARIO_DIR "/paper_platoon.json --dt -1 --out " + out.string());
  CHECK(r.code == 1);
  r = cli(std::string("run ") + SCENARIO_DIR "/paper_platoon.json --alpha 0.5 --out " +
          out.string());
  CHECK(r.code == 1);
}

TEST_CASE("parse failures exit 1 and name the key") {
  auto doc = nlohmann::ordered_json::parse(slurp(SCENARIO_DIR "/paper_platoon.json"));
  doc["followers"][1]["params"].erase("Lr_m");
  const fs::path bad = scratch("missing_lr.json");
  std::ofstream(bad) << doc.dump(2);
  const auto r = cli("run " + bad.string() + " --out " + scratch("bad_out").string());
  CHECK(r.code == 1);
  CHECK(r.output.find("Lr") != std::string::npos);
  CHECK(cli("run /nonexistent.json").code == 1);
}

TEST_CASE("aborted simulation exits 2") {
  auto doc = nlohmann::ordered_json::parse(slurp(SCENARIO_DIR "/paper_platoon.json"));
  for (auto& f : doc["followers"]) f["initial_state"]["V_mps"] = 0.0;
  const fs::path path = scratch("stalled.json");
  std::ofstream(path) << doc.dump(2);
  const auto r = cli("run " + path.string() + " --t-end 1 --out " + scratch("stalled").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("singular-jacobian") != std::string::npos);
}

TEST_CASE("verify suites") {
  auto r = cli("verify graph");
  CHECK(r.code == 0);
  CHECK(r.output.find("PASS graph/path-10") != std::string::npos);
  r = cli("verify qp");
  CHECK(r.code == 0);
  CHECK(r.output.find("1000/1000") != std::string::npos);
  CHECK(cli("verify jacobian").code == 0);
  CHECK(cli("verify euler").code == 0);
  CHECK(cli("verify bogus").code == 1);
  CHECK(cli("").code == 1);
}
