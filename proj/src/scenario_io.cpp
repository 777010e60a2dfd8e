#include "safe_consensus/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace safe_consensus {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ScenarioParseError(msg); }

/// Strict view over one JSON object: every key must be consumed exactly
/// once, anything left over is reported by finish().
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(where() + " must be an object");
  }

  const json& at(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing key " + child(key));
    used_.insert(key);
    return *it;
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail("key " + child(key) + " must be a number");
    return v.get<double>();
  }

  bool flag(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) fail("key " + child(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail("key " + child(key) + " must be a string");
    return v.get<std::string>();
  }

  Vec2 pair(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail("key " + child(key) + " must be a two-element number array");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  Section section(const std::string& key) { return Section(at(key), child(key)); }

  const json& array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail("key " + child(key) + " must be an array");
    return v;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail("unknown key " + child(it.key()));
    }
  }

 private:
  std::string where() const { return path_.empty() ? "document" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string indexed(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

ReferenceSignal read_reference(Section sec) {
  const std::string type = sec.text("type");
  ReferenceSignal out;
  if (type == "paper_trajectory") {
    out = PaperTrajectory{};
  } else if (type == "constant_point") {
    out = ConstantPoint{sec.pair("point_m")};
  } else if (type == "parametric_curve") {
    ParametricCurve curve;
    const json& pieces = sec.array("pieces");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      Section p(pieces[i], indexed(sec.child("pieces"), i));
      ReferencePiece piece;
      piece.t_start = p.number("t_start_s");
      piece.offset = p.pair("offset_m");
      piece.velocity = p.pair("velocity_mps");
      piece.amplitude = p.pair("amplitude_m");
      piece.frequency = p.pair("frequency_radps");
      piece.phase = p.pair("phase_rad");
      p.finish();
      curve.pieces.push_back(piece);
    }
    out = curve;
  } else {
    fail("key " + sec.child("type") + " must be one of paper_trajectory, constant_point, " +
         "parametric_curve (got \"" + type + "\")");
  }
  sec.finish();
  return out;
}

Topology read_topology(Section sec) {
  Topology topo;
  const json& rows = sec.array("neighbors");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& row = rows[i];
    const std::string path = indexed(sec.child("neighbors"), i);
    if (!row.is_array()) fail("key " + path + " must be an array of agent indices");
    std::vector<std::size_t> nbrs;
    for (const json& v : row) {
      if (!v.is_number_unsigned()) fail("key " + path + " must hold non-negative integers");
      nbrs.push_back(v.get<std::size_t>());
    }
    topo.neighbors.push_back(std::move(nbrs));
  }
  sec.finish();
  return topo;
}

json write_pair(const Vec2& v) { return json::array({v[0], v[1]}); }

json write_reference(const ReferenceSignal& ref) {
  if (std::holds_alternative<PaperTrajectory>(ref)) return {{"type", "paper_trajectory"}};
  if (const auto* c = std::get_if<ConstantPoint>(&ref)) {
    return {{"type", "constant_point"}, {"point_m", write_pair(c->point)}};
  }
  const auto& curve = std::get<ParametricCurve>(ref);
  json pieces = json::array();
  for (const auto& p : curve.pieces) {
    pieces.push_back({{"t_start_s", p.t_start},
                      {"offset_m", write_pair(p.offset)},
                      {"velocity_mps", write_pair(p.velocity)},
                      {"amplitude_m", write_pair(p.amplitude)},
                      {"frequency_radps", write_pair(p.frequency)},
                      {"phase_rad", write_pair(p.phase)}});
  }
  return {{"type", "parametric_curve"}, {"pieces", pieces}};
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }

  Section root(doc, "");
  const json& version = root.at("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kScenarioSchemaVersion) {
    fail("key schema_version must be " + std::to_string(kScenarioSchemaVersion));
  }

  Scenario s;
  s.name = root.text("name");
  s.notes = root.text("notes");
  s.dt = root.number("dt_s");
  s.t_end = root.number("t_end_s");
  s.safety_enabled = root.flag("safety_enabled");
  s.reference = read_reference(root.section("reference"));
  s.topology = read_topology(root.section("topology"));

  {
    Section p = root.section("predictor");
    s.predictor.horizon = p.number("horizon_s");
    s.predictor.rk_rel_tol = p.number("rk_rel_tol");
    s.predictor.rk_abs_tol = p.number("rk_abs_tol");
    s.predictor.fd_step = p.number("fd_step");
    p.finish();
  }
  {
    Section p = root.section("safety");
    s.safety.k_v = p.number("k_v_s");
    s.safety.q1 = p.number("q1");
    s.safety.q2 = p.number("q2");
    s.safety.cbf_gain = p.number("cbf_gain");
    p.finish();
  }

  const json& followers = root.array("followers");
  for (std::size_t i = 0; i < followers.size(); ++i) {
    Section f(followers[i], indexed("followers", i));
    FollowerSpec spec;
    s.speedups.alpha.push_back(f.number("alpha"));
    {
      Section p = f.section("params");
      spec.params.Lf = p.number("Lf_m");
      spec.params.Lr = p.number("Lr_m");
      spec.params.a_min = p.number("a_min_mps2");
      spec.params.a_max = p.number("a_max_mps2");
      spec.params.gamma_min = p.number("gamma_min_rad");
      spec.params.gamma_max = p.number("gamma_max_rad");
      p.finish();
    }
    {
      Section p = f.section("initial_state");
      spec.initial_state.z1 = p.number("z1_m");
      spec.initial_state.z2 = p.number("z2_m");
      spec.initial_state.V = p.number("V_mps");
      spec.initial_state.psi = p.number("psi_rad");
      p.finish();
    }
    {
      Section p = f.section("initial_input");
      spec.initial_input.a = p.number("a_mps2");
      spec.initial_input.gamma = p.number("gamma_rad");
      p.finish();
    }
    f.finish();
    s.followers.push_back(spec);
  }
  root.finish();

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["name"] = s.name;
  doc["notes"] = s.notes;
  doc["dt_s"] = s.dt;
  doc["t_end_s"] = s.t_end;
  doc["safety_enabled"] = s.safety_enabled;
  doc["reference"] = write_reference(s.reference);
  doc["topology"] = {{"neighbors", s.topology.neighbors}};
  doc["predictor"] = {{"horizon_s", s.predictor.horizon},
                      {"rk_rel_tol", s.predictor.rk_rel_tol},
                      {"rk_abs_tol", s.predictor.rk_abs_tol},
                      {"fd_step", s.predictor.fd_step}};
  doc["safety"] = {{"k_v_s", s.safety.k_v},
                   {"q1", s.safety.q1},
                   {"q2", s.safety.q2},
                   {"cbf_gain", s.safety.cbf_gain}};
  json followers = json::array();
  for (std::size_t i = 0; i < s.followers.size(); ++i) {
    const auto& f = s.followers[i];
    followers.push_back(
        {{"alpha", s.speedups.alpha.at(i)},
         {"params",
          {{"Lf_m", f.params.Lf},
           {"Lr_m", f.params.Lr},
           {"a_min_mps2", f.params.a_min},
           {"a_max_mps2", f.params.a_max},
           {"gamma_min_rad", f.params.gamma_min},
           {"gamma_max_rad", f.params.gamma_max}}},
         {"initial_state",
          {{"z1_m", f.initial_state.z1},
           {"z2_m", f.initial_state.z2},
           {"V_mps", f.initial_state.V},
           {"psi_rad", f.initial_state.psi}}},
         {"initial_input", {{"a_mps2", f.initial_input.a}, {"gamma_rad", f.initial_input.gamma}}}});
  }
  doc["followers"] = followers;
  return doc.dump(2) + "\n";
}

}  // namespace safe_consensus
