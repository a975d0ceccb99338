#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "foldocp/plant.hpp"

// Continuous-time necessary conditions for the attitude tracking problem with
// running cost
//   C = 1/2 (c1 u_dot^2 + c2 |tau|^2 + c3 |g_d^{-1} g - g^{-1} g_d|_F^2 + c4 |Pi - Pi_d|^2)
// and Pontryagin Hamiltonian
//   H = C + <p_Pi, F - I^{-1}(u) Pi x Pi> + <p_xi, I^{-1}(u) Pi>.
// Costates follow p_dot = -dH/dx with the attitude costate left-trivialized.
namespace foldocp::ocp {

using liealg::Mat3;
using liealg::Rotation;
using liealg::Vec3;
using plant::Vec4;

struct CostWeights {
  double c1 = 0.01;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 0.1;

  // c1 > 0, c2 > 0, c3 >= 0, c4 >= 0
  void validate() const;
};

// Reference attitude and momentum as deterministic functions of time.
struct Reference {
  std::function<Rotation(double)> g_d;
  std::function<Vec3(double)> Pi_d;

  static Reference constant(const Rotation& g, const Vec3& Pi = Vec3::Zero());
};

struct OCPState {
  Rotation g;
  Vec3 Pi = Vec3::Zero();
  double u = plant::kNominalArmAngle;
  double u_dot = 0.0;
  Vec3 p_Pi = Vec3::Zero();
  Vec3 p_xi = Vec3::Zero();
};

struct OCPDerivative {
  Mat3 g_dot = Mat3::Zero();
  Vec3 Pi_dot = Vec3::Zero();
  double u_dot = 0.0;
  double u_ddot = 0.0;
  Vec3 p_Pi_dot = Vec3::Zero();
  Vec3 p_xi_dot = Vec3::Zero();
};

// g_d^{-1} g - g^{-1} g_d
Mat3 attitude_error(const Rotation& g_d, const Rotation& g);
// |attitude_error|_F^2
double attitude_error_sq(const Rotation& g_d, const Rotation& g);
// Left-trivialized gradient of attitude_error_sq: component i is
// d/de |E(g exp(e hat(e_i)))|_F^2 at e = 0.
Vec3 attitude_error_sq_gradient(const Rotation& g_d, const Rotation& g);

double running_cost(const CostWeights& w, const Reference& ref, double t,
                    const Rotation& g, const Vec3& Pi, double u_dot, const Vec4& tau);

double pontryagin_hamiltonian(const CostWeights& w, const plant::Plant& plant,
                              const Reference& ref, double t, const OCPState& s,
                              const Vec4& tau);

// Stationary point of H in tau: c2 tau + B(u)^T p_Pi = 0.
Vec4 tau_star(const CostWeights& w, const plant::ActuationModel& act, const Vec3& p_Pi,
              double u);
// The printed rotor-command list, tau = B(u)^T p_Pi / c2 (opposite sign).
// Kept for transcription reports only.
Vec4 tau_printed(const CostWeights& w, const plant::ActuationModel& act, const Vec3& p_Pi,
                 double u);

// A_{I(u)}(Pi): A p_Pi = -d/dPi <p_Pi, Pi x I^{-1}(u) Pi> (matrix times column).
Mat3 A_matrix(const plant::InertiaModel& model, double u, const Vec3& Pi);

// p_Pi_dot = -c4 (Pi - Pi_d) + A p_Pi - I^{-1}(u) p_xi
Vec3 pPi_rhs(const CostWeights& w, const plant::InertiaModel& model, const OCPState& s,
             const Reference& ref, double t);
// Componentwise transcription of the expanded p_Pi list as printed. Its
// index pattern does not match A p_Pi; used in discrepancy reports.
Vec3 pPi_rhs_printed(const CostWeights& w, const plant::InertiaModel& model,
                     const OCPState& s, const Reference& ref, double t);

// p_xi_dot = -(c3/2) grad|E|^2 + ad*_xi p_xi
Vec3 pXi_rhs(const CostWeights& w, const Rotation& g, const Vec3& xi, const Vec3& p_xi,
             const Reference& ref, double t);

// Arm-angle acceleration from d/dt(c1 u_dot) = dH/du at tau = tau_star.
// Throws RegularityViolation when c1 == 0.
double u_ddot(const CostWeights& w, const plant::Plant& plant, const OCPState& s);

OCPDerivative necessary_rhs(const CostWeights& w, const plant::Plant& plant,
                            const Reference& ref, double t, const OCPState& s);

// Residuals of the first constraint submanifold:
// (|dH/dtau|, |p_u + dH/du_dot|).
std::pair<double, double> first_constraint_check(const CostWeights& w,
                                                 const plant::ActuationModel& act,
                                                 const OCPState& s, const Vec4& tau,
                                                 double p_u);

// RK4 on the extremal field; g is advanced in the embedding and projected back
// onto SO(3) when it drifts past the Rotation tolerance.
OCPState rk4_extremal_step(const CostWeights& w, const plant::Plant& plant,
                           const Reference& ref, double t, const OCPState& s, double h);

std::vector<OCPState> integrate_extremal(const CostWeights& w, const plant::Plant& plant,
                                         const Reference& ref, const OCPState& s0,
                                         double T, double h);

}  // namespace foldocp::ocp
