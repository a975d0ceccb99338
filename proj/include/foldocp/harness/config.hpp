#pragma once

#include <cstdint>
#include <string>

#include "foldocp/solver.hpp"

// Scenario configuration. Stored as JSON with the unit of each quantity in
// its key name (h_s, Ic_kgm2, roll_rad, ...).
namespace foldocp::harness {

using liealg::Vec3;

enum class ScenarioKind { Stabilization, Tracking, FreeBody };
enum class ReferenceKind { Constant, YawRamp };

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::Constant;
  double roll = 0.0;  // rad
  double pitch = 0.0;
  double yaw = 0.0;
  double yaw_end = 0.5;  // rad at t = T, YawRamp only
};

struct InitialState {
  double roll = 0.0;  // rad
  double pitch = 0.0;
  double yaw = 0.0;
  Vec3 Pi = Vec3::Zero();  // kg m^2 / s
  double u = plant::kNominalArmAngle;
};

struct CostateSpec {
  bool given = false;
  Vec3 p_Pi = Vec3::Zero();
  Vec3 p_xi = Vec3::Zero();
  double u_dot = 0.0;  // rad/s
};

struct OutputSpec {
  std::string dir = "out";
  std::string csv = "trajectory.csv";
  bool svg = true;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Stabilization;
  plant::Plant plant = plant::Plant::calibrated();
  double vehicle_mass = 1.6;  // kg, not used by the rotational model
  ocp::CostWeights weights;
  varint::GridSpec grid{0.01, 500};
  solver::BoundaryMode boundary = solver::BoundaryMode::FreeTerminal;
  ReferenceSpec reference;
  InitialState initial;
  CostateSpec costate;
  plant::ArmAngleBox box;
  solver::SolverConfig solver;
  liealg::Retraction retraction = liealg::Retraction::Cayley;
  int continuation_steps = 10;  // 0 disables the fallback
  OutputSpec output;
  std::uint64_t seed = 0;

  // Throws ValidationError naming the violated invariant.
  void validate() const;
};

// Defaults for each scenario. Stabilization: initial roll 1.0821 rad, T = 5 s.
// Tracking: yaw ramp 0 -> 0.5 rad over T = 2 s. FreeBody: tau = 0, fixed arm.
ScenarioConfig default_config(ScenarioKind kind);

// Missing keys take the defaults of the selected scenario. Unknown keys and
// type mismatches throw ParseError naming the field; malformed JSON throws
// ParseError with the line number.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

std::string to_string(ScenarioKind kind);
std::string to_string(solver::BoundaryMode mode);
solver::BoundaryMode parse_boundary_mode(const std::string& s);

}  // namespace foldocp::harness
