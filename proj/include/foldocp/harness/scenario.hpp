#pragma once

#include <string>
#include <vector>

#include "foldocp/harness/config.hpp"
#include "foldocp/harness/euler.hpp"

namespace foldocp::harness {

struct KnotRecord {
  double t = 0.0;
  EulerAngles attitude;
  EulerAngles reference;
  Vec3 error = Vec3::Zero();  // attitude - reference, wrapped
  double u = 0.0;
  plant::Vec4 tau = plant::Vec4::Zero();
  Vec3 Pi = Vec3::Zero();
  double Pi_norm = 0.0;
  double kkt_residual = 0.0;      // max |residual| over the rows of knot k and interval k
  double attitude_error = 0.0;    // |g_d^{-1} g - g^{-1} g_d|_F
};

struct RunReport {
  std::string scenario;
  std::vector<KnotRecord> records;
  solver::SolverReport solver;
  int continuation_stages = 0;  // 0 when the direct solve converged
  double cost = 0.0;
  double final_attitude_error = 0.0;
  double max_kkt_residual = 0.0;
  bool arm_in_box = true;
  plant::ArmAngleBox box;
  double u_min = 0.0;
  double u_max = 0.0;
};

enum class SimulateMode { Rk4, Dlp };

ocp::Reference make_reference(const ScenarioConfig& cfg);
varint::DiscreteProblem make_problem(const ScenarioConfig& cfg);
solver::BoundaryConditions make_boundary(const ScenarioConfig& cfg);

// Discrete solve of the configured scenario. A free-body scenario runs the
// unforced discrete Lie-Poisson stepper instead. When the direct Newton solve
// of a stabilization or tracking problem fails to converge and
// continuation_steps > 0, the initial attitude and momentum are scaled from
// the reference towards the configured values in that many stages, each
// started from the previous solution.
RunReport run_scenario(const ScenarioConfig& cfg);

// Forward simulation of the unforced body (tau = 0, u fixed at initial.u).
RunReport simulate(const ScenarioConfig& cfg, SimulateMode mode);

// Records for a solved discrete trajectory.
RunReport make_report(const ScenarioConfig& cfg, const varint::DiscreteProblem& p,
                      const solver::BoundaryConditions& bc, const varint::DiscreteTrajectory& traj);

struct SweepRow {
  double value = 0.0;
  int N = 0;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  double final_attitude_error = 0.0;
  double cost = 0.0;
  std::string error;  // message when the run threw
};

// param: h_s (N follows so that T is kept), N, c1, c2, c3, c4.
std::vector<SweepRow> sweep(const ScenarioConfig& cfg, const std::string& param,
                            const std::vector<double>& values);

}  // namespace foldocp::harness
