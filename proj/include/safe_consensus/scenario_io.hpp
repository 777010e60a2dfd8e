#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "safe_consensus/sim.hpp"

namespace safe_consensus {

inline constexpr int kScenarioSchemaVersion = 1;

/// Malformed scenario document. The message names the offending key path,
/// e.g. "followers[2].params.Lr".
class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSON scenario document. Unknown keys and missing keys are
/// errors; the result is also passed through Scenario::validate (whose
/// std::invalid_argument is rethrown as ScenarioParseError).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Pretty-printed JSON; doubles are written with round-trip precision.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace safe_consensus
