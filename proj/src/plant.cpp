#include "foldocp/plant.hpp"

#include <array>
#include <cmath>

namespace foldocp::plant {

void InertiaModel::validate() const {
  if (!(Ic > 0.0) || !(l > 0.0) || !(m >= 0.0) || !std::isfinite(Ic + l + m)) {
    throw ValidationError("inertia model requires Ic > 0, l > 0, m >= 0");
  }
}

void ActuationModel::validate() const {
  if (!(l > 0.0) || !(kappa1 > 0.0) || !(kappa2 > 0.0)) {
    throw ValidationError("actuation model requires l > 0, kappa1 > 0, kappa2 > 0");
  }
}

Plant Plant::calibrated() { return Plant{}; }

void Plant::validate() const {
  inertia.validate();
  actuation.validate();
}

Vec3 inertia_diag(const InertiaModel& model, double u) {
  const double s = std::sin(u);
  const double c = std::cos(u);
  const double k = 4.0 * model.l * model.l * model.m;
  return Vec3(model.Ic + k * s * s, model.Ic + k * c * c, model.Ic + k);
}

Vec3 d_inertia_du(const InertiaModel& model, double u) {
  const double k = 4.0 * model.l * model.l * model.m;
  const double s2 = std::sin(2.0 * u);
  return Vec3(k * s2, -k * s2, 0.0);
}

Vec3 inertia_inv(const InertiaModel& model, double u) {
  return inertia_diag(model, u).cwiseInverse();
}

Vec3 d_inertia_inv_du(const InertiaModel& model, double u) {
  const Vec3 I = inertia_diag(model, u);
  const Vec3 dI = d_inertia_du(model, u);
  return Vec3(-dI(0) / (I(0) * I(0)), -dI(1) / (I(1) * I(1)), 0.0);
}

Mat34 torque_map(const ActuationModel& act, double u) {
  const double a = act.l * std::sin(u) * act.kappa1;
  const double b = act.l * std::cos(u) * act.kappa1;
  const double c = act.l * act.kappa2;
  Mat34 B;
  B << -a, a, a, -a,
        b, b, -b, -b,
        c, -c, c, -c;
  return B;
}

Mat34 d_torque_map_du(const ActuationModel& act, double u) {
  const double a = act.l * std::cos(u) * act.kappa1;
  const double b = -act.l * std::sin(u) * act.kappa1;
  Mat34 dB;
  dB << -a, a, a, -a,
         b, b, -b, -b,
         0.0, 0.0, 0.0, 0.0;
  return dB;
}

Vec3 body_torque(const ActuationModel& act, double u, const Vec4& tau) {
  return torque_map(act, u) * tau;
}

Vec3 gyroscopic(const InertiaModel& model, const Vec3& Pi, double u) {
  return inertia_inv(model, u).cwiseProduct(Pi).cross(Pi);
}

Vec3 lie_poisson_rhs(const InertiaModel& model, const ActuationModel& act,
                     const Vec3& Pi, double u, const Vec4& tau) {
  return body_torque(act, u, tau) - gyroscopic(model, Pi, u);
}

Vec3 euler_poincare_rhs(const InertiaModel& model, const ActuationModel& act,
                        const Vec3& omega, double u, double u_dot, const Vec4& tau) {
  const Vec3 I = inertia_diag(model, u);
  const Vec3 Iw = I.cwiseProduct(omega);
  const Vec3 rhs = body_torque(act, u, tau) - omega.cross(Iw) -
                   (d_inertia_du(model, u) * u_dot).cwiseProduct(omega);
  return rhs.cwiseQuotient(I);
}

Mat3 reconstruction_rhs(const Rotation& g, const Vec3& Pi, double u,
                        const InertiaModel& model) {
  return g.matrix() * liealg::hat(inertia_inv(model, u).cwiseProduct(Pi));
}

namespace {

struct Deriv {
  Mat3 g_dot;
  Vec3 Pi_dot;
};

Deriv plant_field(const Plant& plant, const Mat3& g, const Vec3& Pi, const ControlInput& in) {
  const Vec3 omega = inertia_inv(plant.inertia, in.u).cwiseProduct(Pi);
  return {g * liealg::hat(omega),
          lie_poisson_rhs(plant.inertia, plant.actuation, Pi, in.u, in.tau)};
}

PlantState finish_step(const Mat3& g, const Vec3& Pi) {
  if (!g.allFinite() || !Pi.allFinite()) {
    throw NonFinite("rk4_step: state diverged");
  }
  if (liealg::orthogonality_error(g) > liealg::kRotationTol) {
    return {liealg::orthonormalize(g), Pi};
  }
  return {Rotation(g), Pi};
}

PlantState rk4_core(const Plant& plant, const PlantState& state,
                    const std::array<ControlInput, 3>& in, double h) {
  const Mat3& g0 = state.g.matrix();
  const Vec3& P0 = state.Pi;
  const Deriv k1 = plant_field(plant, g0, P0, in[0]);
  const Deriv k2 = plant_field(plant, g0 + 0.5 * h * k1.g_dot, P0 + 0.5 * h * k1.Pi_dot, in[1]);
  const Deriv k3 = plant_field(plant, g0 + 0.5 * h * k2.g_dot, P0 + 0.5 * h * k2.Pi_dot, in[1]);
  const Deriv k4 = plant_field(plant, g0 + h * k3.g_dot, P0 + h * k3.Pi_dot, in[2]);
  const Mat3 g = g0 + (h / 6.0) * (k1.g_dot + 2.0 * k2.g_dot + 2.0 * k3.g_dot + k4.g_dot);
  const Vec3 Pi = P0 + (h / 6.0) * (k1.Pi_dot + 2.0 * k2.Pi_dot + 2.0 * k3.Pi_dot + k4.Pi_dot);
  return finish_step(g, Pi);
}

}  // namespace

PlantState rk4_step(const Plant& plant, const PlantState& state,
                    const InputProgram& input, double t, double h) {
  if (!(h > 0.0)) throw ValidationError("rk4_step: h must be positive");
  return rk4_core(plant, state, {input(t), input(t + 0.5 * h), input(t + h)}, h);
}

PlantState rk4_step(const Plant& plant, const PlantState& state,
                    const ControlInput& input, double h) {
  if (!(h > 0.0)) throw ValidationError("rk4_step: h must be positive");
  return rk4_core(plant, state, {input, input, input}, h);
}

PlantTrajectory integrate(const Plant& plant, const PlantState& state0,
                          const InputProgram& input, double T, double h) {
  if (!(h > 0.0) || !(T >= 0.0)) throw ValidationError("integrate: need h > 0, T >= 0");
  PlantTrajectory out;
  const long steps = static_cast<long>(std::ceil(T / h - 1e-9));
  out.t.reserve(steps + 1);
  out.states.reserve(steps + 1);
  out.t.push_back(0.0);
  out.states.push_back(state0);
  PlantState s = state0;
  for (long k = 0; k < steps; ++k) {
    const double t = k * h;
    const double step = std::min(h, T - t);
    s = rk4_step(plant, s, input, t, step);
    if ((k + 1) % kReorthoInterval == 0) s.g = liealg::orthonormalize(s.g);
    out.t.push_back(t + step);
    out.states.push_back(s);
  }
  return out;
}

double planar_omega2_closed_form(const InertiaModel& model, const ActuationModel& act,
                                 double u, double tau_integral, double omega2_0) {
  const double c = std::cos(u);
  const double I2 = model.Ic + 4.0 * model.l * model.l * c * c * model.m;
  return act.l * c * act.kappa1 / I2 * tau_integral + omega2_0;
}

double planar_omega2_closed_form(const InertiaModel& model, const ActuationModel& act,
                                 double u, const std::function<Vec4(double)>& tau,
                                 double t0, double t, double omega2_0) {
  // Composite 5-point Gauss-Legendre quadrature.
  static constexpr std::array<double, 5> nodes = {
      0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {
      0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
      0.2369268850561891};
  constexpr int panels = 256;
  const double width = (t - t0) / panels;
  double integral = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = t0 + (p + 0.5) * width;
    for (int q = 0; q < 5; ++q) {
      const Vec4 v = tau(mid + 0.5 * width * nodes[q]);
      integral += 0.5 * width * weights[q] * (v(0) + v(1) - v(2) - v(3));
    }
  }
  return planar_omega2_closed_form(model, act, u, integral, omega2_0);
}

}  // namespace foldocp::plant
