#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "foldocp/varint.hpp"

// Newton solution of the discrete KKT system.
//
// Unknowns are laid out knot-major: for each knot k the block
// [delta_g(3), Pi(3), u, tau(4)] followed, for k < N, by [lambda_k(3), mu_k(3)].
// Attitudes enter through the chart g_k -> g_k R(delta_g). The residual has the
// same layout: knot rows carry dS/d(knot k) / h, or the boundary equations at a
// fixed knot, and interval rows carry (Phi123_k, Phi4_k).
namespace foldocp::solver {

using varint::DiscreteKnot;
using varint::DiscreteProblem;
using varint::DiscreteTrajectory;
using liealg::Vec3;

inline constexpr int kSegment = varint::kKnotDim + varint::kIntervalDim;

enum class BoundaryMode { FixedEndpoints, InitialCostate, FreeTerminal };
enum class SolveMode { FullNewton, Marching, Shooting };

struct BoundaryConditions {
  BoundaryMode mode = BoundaryMode::FixedEndpoints;
  DiscreteKnot initial;   // g, Pi, u are imposed at k = 0
  DiscreteKnot terminal;  // g, Pi, u are imposed at k = N in FixedEndpoints
  // InitialCostate: continuous costates and arm rate at t = 0
  Vec3 p_Pi0 = Vec3::Zero();
  Vec3 p_xi0 = Vec3::Zero();
  double u_dot0 = 0.0;

  bool terminal_fixed() const { return mode != BoundaryMode::FreeTerminal; }
};

struct SolverConfig {
  double tol_residual = 1e-9;
  double tol_step = 1e-10;
  int max_iter = 100;
  double fd_epsilon = 1e-6;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-8;
  SolveMode mode = SolveMode::FullNewton;
  bool parallel = true;  // colored sparse Jacobian; false selects the dense serial reference

  void validate() const;
};

struct SolverReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;  // inf-norm before each iteration and at exit
  double condition_estimate = 0.0;       // lower bound on cond_1 of the last Jacobian
  double final_residual = 0.0;
};

struct SolveResult {
  DiscreteTrajectory traj;
  SolverReport report;
};

int unknown_count(int N);

// pack gives the chart origin at traj: zero attitude increments, all other
// entries as stored. unpack(base, v) applies g_k <- g_k R(delta_k) and copies
// the remaining entries. Throws OutOfChart when |delta_k| >= pi - 1e-3.
Eigen::VectorXd pack(const DiscreteTrajectory& traj);
DiscreteTrajectory unpack(const DiscreteTrajectory& base, const Eigen::VectorXd& v,
                          liealg::Retraction r = liealg::Retraction::Cayley);

Eigen::VectorXd assemble_residual(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                  const BoundaryConditions& bc);

// (|d^2 L_k / du_k du_{k+1}|, c1 / h)
std::pair<double, double> regularity_check(const DiscreteProblem& p,
                                           const DiscreteTrajectory& traj, int k);

DiscreteTrajectory initial_guess(const DiscreteProblem& p, const BoundaryConditions& bc);

// Throws SingularError when the regularity block vanishes or the Jacobian
// cannot be factorized, NoConvergence after max_iter iterations or when the
// line search stalls.
SolveResult newton_solve(const DiscreteProblem& p, const DiscreteTrajectory& traj0,
                         const BoundaryConditions& bc, const SolverConfig& cfg);

// Given knots 0..k and multipliers 0..k-1, computes knot k + 1 and the
// multipliers of interval k from the stationarity conditions at knot k and
// the constraints of interval k. The tau rows at knot k are projected onto the
// range of B(u_k); the remaining direction is closed by requiring tau_{k+1}
// to have no component in the null space of B. Overwrites traj in place.
// Returns the number of Newton iterations.
int step_map(const DiscreteProblem& p, DiscreteTrajectory& traj, int k, const SolverConfig& cfg);

// Runs step_map for k = 1..N-1 starting from knots 0, 1 and multipliers 0 of
// traj.
DiscreteTrajectory march(const DiscreteProblem& p, const DiscreteTrajectory& start,
                         const SolverConfig& cfg);

// Extremal of the continuous necessary conditions started from the initial
// state and costates in bc, sampled on the grid. RK4 with `substeps` steps
// per grid interval.
std::vector<ocp::OCPState> shooting_extremal(const DiscreteProblem& p,
                                             const BoundaryConditions& bc, int substeps = 10);

// Fixed-endpoint conditions matched to a shooting extremal, and the sampled
// extremal as a discrete starting point (lambda ~ p_Pi, mu ~ p_xi).
std::pair<BoundaryConditions, DiscreteTrajectory> shooting_matched(
    const DiscreteProblem& p, const std::vector<ocp::OCPState>& extremal);

// Dispatches on bc.mode and cfg.mode.
SolveResult solve(const DiscreteProblem& p, const BoundaryConditions& bc,
                  const SolverConfig& cfg);

}  // namespace foldocp::solver
