#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "foldocp/ocp.hpp"

// Discrete side: the unforced discrete Lie-Poisson stepper, the trapezoidal
// discretization of cost and dynamics, and the KKT conditions of the discrete
// optimal control problem.
//
// Per interval k (knots a = k, b = k + 1) the extended cost is
//   L_k = h <lambda_k, Phi123_k> + <mu_k, Phi4_k> - C_d^k
// and the discrete action is S = sum_k L_k. Attitude variations use the chart
// g -> g R(delta) with R the Cayley retraction.
namespace foldocp::varint {

using liealg::Mat3;
using liealg::Retraction;
using liealg::Rotation;
using liealg::Vec3;
using plant::Vec4;

inline constexpr int kKnotDim = 11;     // delta_g(3), Pi(3), u, tau(4)
inline constexpr int kIntervalDim = 6;  // lambda(3), mu(3)

using KnotVec = Eigen::Matrix<double, kKnotDim, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct GridSpec {
  double h = 0.01;
  int N = 100;

  double T() const { return h * N; }
  double t(int k) const { return h * k; }
  // h > 0, N >= 2, T finite
  void validate() const;
};

struct DiscreteKnot {
  Rotation g;
  Vec3 Pi = Vec3::Zero();
  double u = plant::kNominalArmAngle;
  Vec4 tau = Vec4::Zero();
};

struct Multipliers {
  Vec3 lambda = Vec3::Zero();
  Vec3 mu = Vec3::Zero();
};

struct DiscreteTrajectory {
  GridSpec grid;
  std::vector<DiscreteKnot> knots;        // N + 1
  std::vector<Multipliers> multipliers;   // N

  static DiscreteTrajectory zeros(const GridSpec& grid);
  void validate() const;
};

struct DiscreteProblem {
  plant::Plant plant;
  ocp::CostWeights weights;
  ocp::Reference ref = ocp::Reference::constant(Rotation());
  GridSpec grid;
  Retraction retraction = Retraction::Cayley;
};

// ---------------------------------------------------------------------------
// Free rigid body

// One step of the unforced discrete Lie-Poisson equations with constant
// inertia. The carried momentum m_k = (dR^{-1}_{-h w_{k-1}})^* Pi_{k-1}; the step
// solves (dR^{-1}_{h w_k})^* I w_k = m_k for w_k, then
//   g_{k+1} = g_k R(h w_k),  m_{k+1} = (dR^{-1}_{-h w_k})^* I w_k.
// |m| is preserved exactly in exact arithmetic.
struct DlpStep {
  Rotation g;
  Vec3 m;
  Vec3 omega;  // w_k
  Vec3 Pi;     // I w_k
  int iterations = 0;
};

DlpStep free_dlp_step(const Vec3& inertia, double h, const Rotation& g, const Vec3& m,
                      Retraction r = Retraction::Cayley);

// ---------------------------------------------------------------------------
// Cost and constraints

double discrete_cost(const DiscreteProblem& p, int k, const DiscreteKnot& a,
                     const DiscreteKnot& b);

// (Pi_b - Pi_a)/h + 1/2 n(Pi_a, u_a) + 1/2 n(Pi_b, u_b) - 1/2 B(u_a) tau_a - 1/2 B(u_b) tau_b
// with n(Pi, u) = I^{-1}(u) Pi x Pi.
Vec3 residual_phi123(const plant::Plant& plant, double h, const DiscreteKnot& a,
                     const DiscreteKnot& b);
// Component-by-component form written with the inertia ratios
// (I2 - I3) / (2 I3 I2) etc. Second code path for residual_phi123.
Vec3 residual_phi123_componentwise(const plant::Plant& plant, double h, const DiscreteKnot& a,
                                   const DiscreteKnot& b);

// R^{-1}(g_a^{-1} g_b) - h/2 I^{-1}(u_a) Pi_a - h/2 I^{-1}(u_b) Pi_b
Vec3 residual_phi4(const plant::Plant& plant, double h, const DiscreteKnot& a,
                   const DiscreteKnot& b, Retraction r = Retraction::Cayley);

double interval_extended_cost(const DiscreteProblem& p, int k, const DiscreteKnot& a,
                              const DiscreteKnot& b, const Multipliers& m);
double extended_cost(const DiscreteProblem& p, const DiscreteTrajectory& traj);
double total_cost(const DiscreteProblem& p, const DiscreteTrajectory& traj);

// ---------------------------------------------------------------------------
// Exact KKT residuals

// Partial derivatives of L_k. Knot blocks follow the KnotVec layout; the
// multiplier block is (h Phi123_k, Phi4_k).
struct IntervalGradient {
  KnotVec a = KnotVec::Zero();
  KnotVec b = KnotVec::Zero();
  Vec6 mult = Vec6::Zero();
};

IntervalGradient interval_gradient(const DiscreteProblem& p, int k, const DiscreteKnot& a,
                                   const DiscreteKnot& b, const Multipliers& m);

// Gradient of the discrete action S.
struct KKTResiduals {
  std::vector<KnotVec> knot;  // dS/d(knot k), N + 1 entries
  std::vector<Vec6> interval; // dS/d(lambda_k, mu_k), N entries

  double max_abs() const;
};

KKTResiduals kkt_residuals_exact(const DiscreteProblem& p, const DiscreteTrajectory& traj);

// dS/d(knot k) from the two neighbouring intervals (one at the ends).
KnotVec knot_gradient(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k);

// tau_k = -B(u_k)^T lambda_bar / c2, where lambda_bar is the average of the
// adjacent multipliers (the single adjacent one at the ends).
Vec4 tau_k_star(const ocp::CostWeights& w, const plant::ActuationModel& act,
                const Vec3& lambda_bar, double u);
Vec3 lambda_bar(const DiscreteTrajectory& traj, int k);

// ---------------------------------------------------------------------------
// Printed discrete equations

// Residuals of the printed equations for tau_k, lambda_k, u_k and g_k at an
// interior knot, arranged to be compared with the exact stationarity rows
// divided by h.
struct PrintedKnotResiduals {
  Vec4 tau;
  Vec3 lambda;
  double u;
  Vec3 g;
};

PrintedKnotResiduals kkt_residuals_printed(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                       int k);

struct DiscrepancyRow {
  std::string block;
  double printed_max = 0.0;
  double exact_max = 0.0;
  double deviation = 0.0;  // max |printed - exact|
};

std::vector<DiscrepancyRow> discrepancy_report(const DiscreteProblem& p,
                                               const DiscreteTrajectory& traj);

// Printed closed form for tau_k, transcribed as displayed.
Vec4 tau_k_printed(const ocp::CostWeights& w, const plant::ActuationModel& act,
                   const Vec3& lambda, double u);

// ---------------------------------------------------------------------------
// Forward stepping and regularity

// Advances a knot by solving Phi123 = 0 for Pi_b and Phi4 = 0 for g_b, given
// the controls (u_b, tau_b) at the next knot.
DiscreteKnot trapezoidal_step(const plant::Plant& plant, double h, const DiscreteKnot& a,
                              double u_b, const Vec4& tau_b,
                              Retraction r = Retraction::Cayley);

// d^2 L_k / du_a du_b, obtained by differencing the analytic dL_k/du_a in u_b.
double regularity_block(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k);

}  // namespace foldocp::varint
