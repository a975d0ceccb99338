#pragma once

#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "foldocp/liealg.hpp"

// Continuous-time attitude dynamics of a quadrotor whose arm angle u changes
// its inertia. Body momentum Pi = I(u) omega; rotor commands tau in R^4.
namespace foldocp::plant {

using liealg::Mat3;
using liealg::Rotation;
using liealg::Vec3;
using Vec4 = Eigen::Vector4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// Central body inertia Ic plus four point motors of mass m at arm length l.
struct InertiaModel {
  double Ic = 0.012;  // kg m^2
  double l = 0.235;   // m
  double m = 0.011 / (0.235 * 0.235);  // kg, per motor

  void validate() const;
};

struct ActuationModel {
  double l = 0.235;  // m
  double kappa1 = 1.0;
  double kappa2 = 1.0;

  void validate() const;
};

struct Plant {
  InertiaModel inertia;
  ActuationModel actuation;

  // Defaults reproduce diag(0.034, 0.034, 0.056) kg m^2 at u = pi/4.
  static Plant calibrated();
  void validate() const;
};

inline constexpr double kNominalArmAngle = std::numbers::pi / 4.0;

// Admissible arm-angle interval. Not enforced by the dynamics; checked by
// callers that guard trajectories.
struct ArmAngleBox {
  double lo = -std::numbers::pi / 2.0 + 0.05;
  double hi = std::numbers::pi / 2.0 - 0.05;

  bool contains(double u) const { return u > lo && u < hi; }
};

struct PlantState {
  Rotation g;
  Vec3 Pi = Vec3::Zero();
};

struct ControlInput {
  double u = kNominalArmAngle;
  double u_dot = 0.0;
  Vec4 tau = Vec4::Zero();
};

// Open-loop control program t -> (u, u_dot, tau).
using InputProgram = std::function<ControlInput(double)>;

// (I1, I2, I3) with I1 = Ic + 4 l^2 sin^2(u) m, I2 = Ic + 4 l^2 cos^2(u) m,
// I3 = Ic + 4 l^2 m.
Vec3 inertia_diag(const InertiaModel& model, double u);
// dI/du
Vec3 d_inertia_du(const InertiaModel& model, double u);
// (1/I1, 1/I2, 1/I3)
Vec3 inertia_inv(const InertiaModel& model, double u);
// d/du (1/I1, 1/I2, 1/I3); third component is exactly zero.
Vec3 d_inertia_inv_du(const InertiaModel& model, double u);

// Rotor command to body torque map B(u), so that F = B(u) tau.
Mat34 torque_map(const ActuationModel& act, double u);
Mat34 d_torque_map_du(const ActuationModel& act, double u);
Vec3 body_torque(const ActuationModel& act, double u, const Vec4& tau);

// Gyroscopic term I^{-1}(u) Pi x Pi; Pi_dot = F - gyroscopic(Pi, u).
Vec3 gyroscopic(const InertiaModel& model, const Vec3& Pi, double u);

// Pi_dot = F - I^{-1}(u) Pi x Pi
Vec3 lie_poisson_rhs(const InertiaModel& model, const ActuationModel& act,
                     const Vec3& Pi, double u, const Vec4& tau);

// omega_dot from I(u) omega_dot + (dI/du u_dot) omega = F - omega x I(u) omega
Vec3 euler_poincare_rhs(const InertiaModel& model, const ActuationModel& act,
                        const Vec3& omega, double u, double u_dot, const Vec4& tau);

// g_dot = g hat(I^{-1}(u) Pi)
Mat3 reconstruction_rhs(const Rotation& g, const Vec3& Pi, double u,
                        const InertiaModel& model);

// Classical RK4 step over [t, t + h]. The attitude is projected back onto
// SO(3) only when its orthogonality error exceeds the Rotation tolerance.
PlantState rk4_step(const Plant& plant, const PlantState& state,
                    const InputProgram& input, double t, double h);
PlantState rk4_step(const Plant& plant, const PlantState& state,
                    const ControlInput& input, double h);

struct PlantTrajectory {
  std::vector<double> t;
  std::vector<PlantState> states;
};

// Fixed-step RK4 over [0, T] with h dividing T (the last step is shortened
// otherwise). Re-orthonormalizes g every kReorthoInterval steps.
inline constexpr int kReorthoInterval = 1000;
PlantTrajectory integrate(const Plant& plant, const PlantState& state0,
                          const InputProgram& input, double T, double h);

// Planar closed form for constant u with omega1 = omega3 = 0:
//   omega2(t) = l cos(u) kappa1 / (Ic + 4 l^2 cos^2(u) m) * integral + omega2(t0),
// integral = int_{t0}^{t} (tau1 + tau2 - tau3 - tau4) dz.
double planar_omega2_closed_form(const InertiaModel& model, const ActuationModel& act,
                                 double u, double tau_integral, double omega2_0);
double planar_omega2_closed_form(const InertiaModel& model, const ActuationModel& act,
                                 double u, const std::function<Vec4(double)>& tau,
                                 double t0, double t, double omega2_0);

}  // namespace foldocp::plant
