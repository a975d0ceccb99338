#include "foldocp/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace foldocp::harness {

using json = nlohmann::ordered_json;

namespace {

// Reads the members of one JSON object, remembering which keys were used so
// that the rest can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(where("") + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ParseError(where(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ParseError(where(key) + ": expected an integer");
    out = v.get<int>();
  }

  void uint64(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ParseError(where(key) + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ParseError(where(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ParseError(where(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void vec3(const std::string& key, Vec3& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      throw ParseError(where(key) + ": expected an array of 3 numbers");
    }
    out = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  ObjectReader child(const std::string& key) {
    seen_.insert(key);
    return ObjectReader(j_.at(key), where(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ParseError(where(it.key()) + ": unknown field");
    }
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ScenarioKind parse_kind(const std::string& s, const std::string& field) {
  if (s == "stabilization") return ScenarioKind::Stabilization;
  if (s == "tracking") return ScenarioKind::Tracking;
  if (s == "free_body") return ScenarioKind::FreeBody;
  throw ParseError(field + ": unknown scenario '" + s + "'");
}

ReferenceKind parse_reference_kind(const std::string& s) {
  if (s == "constant") return ReferenceKind::Constant;
  if (s == "yaw_ramp") return ReferenceKind::YawRamp;
  throw ParseError("reference.kind: unknown reference '" + s + "'");
}

solver::SolveMode parse_solve_mode(const std::string& s) {
  if (s == "full_newton") return solver::SolveMode::FullNewton;
  if (s == "marching") return solver::SolveMode::Marching;
  if (s == "shooting") return solver::SolveMode::Shooting;
  throw ParseError("solver.mode: unknown mode '" + s + "'");
}

std::string to_string(solver::SolveMode m) {
  switch (m) {
    case solver::SolveMode::FullNewton: return "full_newton";
    case solver::SolveMode::Marching: return "marching";
    case solver::SolveMode::Shooting: return "shooting";
  }
  return "full_newton";
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Stabilization: return "stabilization";
    case ScenarioKind::Tracking: return "tracking";
    case ScenarioKind::FreeBody: return "free_body";
  }
  return "stabilization";
}

std::string to_string(solver::BoundaryMode mode) {
  switch (mode) {
    case solver::BoundaryMode::FixedEndpoints: return "fixed";
    case solver::BoundaryMode::InitialCostate: return "shooting";
    case solver::BoundaryMode::FreeTerminal: return "free-terminal";
  }
  return "fixed";
}

solver::BoundaryMode parse_boundary_mode(const std::string& s) {
  if (s == "fixed") return solver::BoundaryMode::FixedEndpoints;
  if (s == "shooting") return solver::BoundaryMode::InitialCostate;
  if (s == "free-terminal") return solver::BoundaryMode::FreeTerminal;
  throw ValidationError("boundary must be one of fixed, shooting, free-terminal (got '" + s + "')");
}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.scenario = kind;
  switch (kind) {
    case ScenarioKind::Stabilization:
      c.initial.roll = 1.0821;
      c.grid = {0.01, 500};
      break;
    case ScenarioKind::Tracking:
      c.reference.kind = ReferenceKind::YawRamp;
      c.reference.yaw_end = 0.5;
      c.initial.roll = 0.2;
      c.grid = {0.01, 200};
      break;
    case ScenarioKind::FreeBody:
      c.weights.c3 = 0.0;
      c.weights.c4 = 0.0;
      c.initial.Pi = Vec3(0.02, 0.01, 0.03);
      c.grid = {0.01, 1000};
      c.continuation_steps = 0;
      break;
  }
  return c;
}

void ScenarioConfig::validate() const {
  plant.validate();
  if (weights.c1 == 0.0) {
    throw SingularError("singular Jacobian: weights.c1 = 0 makes the regularity block vanish");
  }
  weights.validate();
  grid.validate();
  solver.validate();
  const auto finite3 = [](const Vec3& v) { return v.allFinite(); };
  if (!std::isfinite(vehicle_mass) || vehicle_mass <= 0.0) {
    throw ValidationError("plant.vehicle_mass_kg must be > 0");
  }
  if (!std::isfinite(initial.roll + initial.pitch + initial.yaw + initial.u) ||
      !finite3(initial.Pi)) {
    throw ValidationError("initial state must be finite");
  }
  if (std::abs(initial.pitch) >= std::numbers::pi / 2.0 - 1e-6) {
    throw ValidationError("initial.pitch_rad must satisfy |pitch| < pi/2");
  }
  if (!(box.lo < box.hi) || box.lo < -std::numbers::pi / 2.0 || box.hi > std::numbers::pi / 2.0) {
    throw ValidationError("arm_box_rad must be an interval inside [-pi/2, pi/2]");
  }
  if (!box.contains(initial.u)) {
    throw ValidationError("initial.u_rad must lie inside arm_box_rad");
  }
  if (!std::isfinite(reference.roll + reference.pitch + reference.yaw + reference.yaw_end) ||
      std::abs(reference.pitch) >= std::numbers::pi / 2.0 - 1e-6) {
    throw ValidationError("reference angles must be finite with |pitch| < pi/2");
  }
  if (costate.given && (!finite3(costate.p_Pi) || !finite3(costate.p_xi) ||
                        !std::isfinite(costate.u_dot))) {
    throw ValidationError("costate values must be finite");
  }
  if (boundary == solver::BoundaryMode::InitialCostate && !costate.given) {
    throw ValidationError("boundary 'shooting' requires a costate block");
  }
  if (continuation_steps < 0) throw ValidationError("solver.continuation_steps must be >= 0");
  if (output.dir.empty() || output.csv.empty()) {
    throw ValidationError("output.dir and output.csv must be non-empty");
  }
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config: malformed JSON at line " + std::to_string(line_of(text, e.byte)) +
                     ": " + e.what());
  }
  ObjectReader root(j, "");

  std::string kind_name = "stabilization";
  root.string("scenario", kind_name);
  ScenarioConfig c = default_config(parse_kind(kind_name, "scenario"));

  if (root.has("plant")) {
    auto r = root.child("plant");
    double l = c.plant.inertia.l;
    r.number("Ic_kgm2", c.plant.inertia.Ic);
    r.number("arm_length_m", l);
    r.number("motor_mass_kg", c.plant.inertia.m);
    r.number("kappa1_N_per_cmd", c.plant.actuation.kappa1);
    r.number("kappa2_N_per_cmd", c.plant.actuation.kappa2);
    r.number("vehicle_mass_kg", c.vehicle_mass);
    c.plant.inertia.l = l;
    c.plant.actuation.l = l;
    r.finish();
  }
  if (root.has("weights")) {
    auto r = root.child("weights");
    r.number("c1", c.weights.c1);
    r.number("c2", c.weights.c2);
    r.number("c3", c.weights.c3);
    r.number("c4", c.weights.c4);
    r.finish();
  }
  if (root.has("grid")) {
    auto r = root.child("grid");
    r.number("h_s", c.grid.h);
    r.integer("N", c.grid.N);
    r.finish();
  }
  if (root.has("boundary")) {
    std::string s;
    root.string("boundary", s);
    try {
      c.boundary = parse_boundary_mode(s);
    } catch (const ValidationError&) {
      throw ParseError("boundary: unknown mode '" + s + "'");
    }
  }
  if (root.has("reference")) {
    auto r = root.child("reference");
    std::string kind;
    r.string("kind", kind);
    if (!kind.empty()) c.reference.kind = parse_reference_kind(kind);
    r.number("roll_rad", c.reference.roll);
    r.number("pitch_rad", c.reference.pitch);
    r.number("yaw_rad", c.reference.yaw);
    r.number("yaw_end_rad", c.reference.yaw_end);
    r.finish();
  }
  if (root.has("initial")) {
    auto r = root.child("initial");
    r.number("roll_rad", c.initial.roll);
    r.number("pitch_rad", c.initial.pitch);
    r.number("yaw_rad", c.initial.yaw);
    r.vec3("Pi_kgm2ps", c.initial.Pi);
    r.number("u_rad", c.initial.u);
    r.finish();
  }
  if (root.has("costate")) {
    if (j.at("costate").is_null()) {
      c.costate.given = false;
    } else {
      auto r = root.child("costate");
      c.costate.given = true;
      r.vec3("p_Pi", c.costate.p_Pi);
      r.vec3("p_xi", c.costate.p_xi);
      r.number("u_dot_radps", c.costate.u_dot);
      r.finish();
    }
  }
  if (root.has("arm_box_rad")) {
    const json& v = j.at("arm_box_rad");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ParseError("arm_box_rad: expected an array of 2 numbers");
    }
    c.box.lo = v[0].get<double>();
    c.box.hi = v[1].get<double>();
  }
  if (root.has("solver")) {
    auto r = root.child("solver");
    r.number("tol_residual", c.solver.tol_residual);
    r.number("tol_step", c.solver.tol_step);
    r.integer("max_iter", c.solver.max_iter);
    r.number("fd_epsilon", c.solver.fd_epsilon);
    r.number("armijo_c", c.solver.armijo_c);
    r.number("backtrack", c.solver.backtrack);
    r.number("min_step", c.solver.min_step);
    std::string mode;
    r.string("mode", mode);
    if (!mode.empty()) c.solver.mode = parse_solve_mode(mode);
    r.boolean("parallel", c.solver.parallel);
    std::string retr;
    r.string("retraction", retr);
    if (retr == "exp") {
      c.retraction = liealg::Retraction::Exponential;
    } else if (retr == "cayley") {
      c.retraction = liealg::Retraction::Cayley;
    } else if (!retr.empty()) {
      throw ParseError("solver.retraction: expected cayley or exp");
    }
    r.integer("continuation_steps", c.continuation_steps);
    r.finish();
  }
  if (root.has("output")) {
    auto r = root.child("output");
    r.string("dir", c.output.dir);
    r.string("csv", c.output.csv);
    r.boolean("svg", c.output.svg);
    r.finish();
  }
  root.uint64("seed", c.seed);
  root.finish();

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config " + path);
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["plant"] = {{"Ic_kgm2", c.plant.inertia.Ic},
                {"arm_length_m", c.plant.inertia.l},
                {"motor_mass_kg", c.plant.inertia.m},
                {"kappa1_N_per_cmd", c.plant.actuation.kappa1},
                {"kappa2_N_per_cmd", c.plant.actuation.kappa2},
                {"vehicle_mass_kg", c.vehicle_mass}};
  j["weights"] = {{"c1", c.weights.c1}, {"c2", c.weights.c2}, {"c3", c.weights.c3},
                  {"c4", c.weights.c4}};
  j["grid"] = {{"h_s", c.grid.h}, {"N", c.grid.N}};
  j["boundary"] = to_string(c.boundary);
  j["reference"] = {{"kind", c.reference.kind == ReferenceKind::YawRamp ? "yaw_ramp" : "constant"},
                    {"roll_rad", c.reference.roll},
                    {"pitch_rad", c.reference.pitch},
                    {"yaw_rad", c.reference.yaw},
                    {"yaw_end_rad", c.reference.yaw_end}};
  j["initial"] = {{"roll_rad", c.initial.roll},
                  {"pitch_rad", c.initial.pitch},
                  {"yaw_rad", c.initial.yaw},
                  {"Pi_kgm2ps", vec_json(c.initial.Pi)},
                  {"u_rad", c.initial.u}};
  if (c.costate.given) {
    j["costate"] = {{"p_Pi", vec_json(c.costate.p_Pi)},
                    {"p_xi", vec_json(c.costate.p_xi)},
                    {"u_dot_radps", c.costate.u_dot}};
  } else {
    j["costate"] = nullptr;
  }
  j["arm_box_rad"] = json::array({c.box.lo, c.box.hi});
  j["solver"] = {{"tol_residual", c.solver.tol_residual},
                 {"tol_step", c.solver.tol_step},
                 {"max_iter", c.solver.max_iter},
                 {"fd_epsilon", c.solver.fd_epsilon},
                 {"armijo_c", c.solver.armijo_c},
                 {"backtrack", c.solver.backtrack},
                 {"min_step", c.solver.min_step},
                 {"mode", to_string(c.solver.mode)},
                 {"parallel", c.solver.parallel},
                 {"retraction", c.retraction == liealg::Retraction::Cayley ? "cayley" : "exp"},
                 {"continuation_steps", c.continuation_steps}};
  j["output"] = {{"dir", c.output.dir}, {"csv", c.output.csv}, {"svg", c.output.svg}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

}  // namespace foldocp::harness
