#include "foldocp/ocp.hpp"

#include <cmath>

namespace foldocp::ocp {

using liealg::hat;

void CostWeights::validate() const {
  if (!(c1 > 0.0)) throw ValidationError("weights.c1 must be > 0");
  if (!(c2 > 0.0)) throw ValidationError("weights.c2 must be > 0");
  if (!(c3 >= 0.0)) throw ValidationError("weights.c3 must be >= 0");
  if (!(c4 >= 0.0)) throw ValidationError("weights.c4 must be >= 0");
}

Reference Reference::constant(const Rotation& g, const Vec3& Pi) {
  return Reference{[g](double) { return g; }, [Pi](double) { return Pi; }};
}

Mat3 attitude_error(const Rotation& g_d, const Rotation& g) {
  const Mat3 Q = g_d.matrix().transpose() * g.matrix();
  return Q - Q.transpose();
}

double attitude_error_sq(const Rotation& g_d, const Rotation& g) {
  return attitude_error(g_d, g).squaredNorm();
}

Vec3 attitude_error_sq_gradient(const Rotation& g_d, const Rotation& g) {
  // d|E|^2 = 4 <E, dQ> with dQ = Q hat(eta)
  const Mat3 Q = g_d.matrix().transpose() * g.matrix();
  const Mat3 M = (Q - Q.transpose()).transpose() * Q;
  Vec3 grad;
  for (int i = 0; i < 3; ++i) {
    grad(i) = 4.0 * (M * hat(Vec3::Unit(i))).trace();
  }
  return grad;
}

double running_cost(const CostWeights& w, const Reference& ref, double t,
                    const Rotation& g, const Vec3& Pi, double u_dot, const Vec4& tau) {
  const double att = attitude_error_sq(ref.g_d(t), g);
  const double mom = (Pi - ref.Pi_d(t)).squaredNorm();
  return 0.5 * (w.c1 * u_dot * u_dot + w.c2 * tau.squaredNorm() + w.c3 * att + w.c4 * mom);
}

double pontryagin_hamiltonian(const CostWeights& w, const plant::Plant& plant,
                              const Reference& ref, double t, const OCPState& s,
                              const Vec4& tau) {
  const double C = running_cost(w, ref, t, s.g, s.Pi, s.u_dot, tau);
  const Vec3 Pi_dot = plant::lie_poisson_rhs(plant.inertia, plant.actuation, s.Pi, s.u, tau);
  const Vec3 xi = plant::inertia_inv(plant.inertia, s.u).cwiseProduct(s.Pi);
  return C + s.p_Pi.dot(Pi_dot) + s.p_xi.dot(xi);
}

Vec4 tau_star(const CostWeights& w, const plant::ActuationModel& act, const Vec3& p_Pi,
              double u) {
  if (!(w.c2 > 0.0)) throw ValidationError("tau_star: c2 must be > 0");
  return -plant::torque_map(act, u).transpose() * p_Pi / w.c2;
}

Vec4 tau_printed(const CostWeights& w, const plant::ActuationModel& act, const Vec3& p_Pi,
                 double u) {
  return -tau_star(w, act, p_Pi, u);
}

Mat3 A_matrix(const plant::InertiaModel& model, double u, const Vec3& Pi) {
  const Vec3 J = plant::inertia_inv(model, u);
  Mat3 A;
  A << 0.0, (J(2) - J(0)) * Pi(2), (J(0) - J(1)) * Pi(1),
       (J(1) - J(2)) * Pi(2), 0.0, (J(0) - J(1)) * Pi(0),
       (J(1) - J(2)) * Pi(1), (J(2) - J(0)) * Pi(0), 0.0;
  return A;
}

Vec3 pPi_rhs(const CostWeights& w, const plant::InertiaModel& model, const OCPState& s,
             const Reference& ref, double t) {
  const Vec3 J = plant::inertia_inv(model, s.u);
  return -w.c4 * (s.Pi - ref.Pi_d(t)) + A_matrix(model, s.u, s.Pi) * s.p_Pi -
         J.cwiseProduct(s.p_xi);
}

Vec3 pPi_rhs_printed(const CostWeights& w, const plant::InertiaModel& model,
                     const OCPState& s, const Reference& ref, double t) {
  const Vec3 J = plant::inertia_inv(model, s.u);
  const Vec3& P = s.Pi;
  const Vec3& p = s.p_Pi;
  const Vec3& q = s.p_xi;
  const Vec3 d = s.Pi - ref.Pi_d(t);
  return Vec3(p(1) * (J(1) - J(0)) * P(1) + p(2) * (J(0) - J(2)) * P(2) - q(0) * J(0) - w.c4 * d(0),
              p(0) * (J(0) - J(1)) * P(0) - p(2) * (J(1) - J(2)) * P(2) - q(1) * J(1) - w.c4 * d(1),
              -p(0) * (J(0) - J(2)) * P(0) + p(1) * (J(1) - J(2)) * P(1) - q(2) * J(2) - w.c4 * d(2));
}

Vec3 pXi_rhs(const CostWeights& w, const Rotation& g, const Vec3& xi, const Vec3& p_xi,
             const Reference& ref, double t) {
  return -0.5 * w.c3 * attitude_error_sq_gradient(ref.g_d(t), g) + liealg::coad(xi, p_xi);
}

double u_ddot(const CostWeights& w, const plant::Plant& plant, const OCPState& s) {
  if (w.c1 == 0.0) {
    throw RegularityViolation("u_ddot: c1 = 0 makes d2C/du_dot2 singular");
  }
  const Vec4 tau = tau_star(w, plant.actuation, s.p_Pi, s.u);
  const Vec3 dJ = plant::d_inertia_inv_du(plant.inertia, s.u);
  const Vec3 dF = plant::d_torque_map_du(plant.actuation, s.u) * tau;
  const Vec3 dn = dJ.cwiseProduct(s.Pi).cross(s.Pi);
  const double dH_du = s.p_Pi.dot(dF - dn) + s.p_xi.dot(dJ.cwiseProduct(s.Pi));
  return dH_du / w.c1;
}

OCPDerivative necessary_rhs(const CostWeights& w, const plant::Plant& plant,
                            const Reference& ref, double t, const OCPState& s) {
  const Vec4 tau = tau_star(w, plant.actuation, s.p_Pi, s.u);
  const Vec3 xi = plant::inertia_inv(plant.inertia, s.u).cwiseProduct(s.Pi);
  OCPDerivative d;
  d.g_dot = s.g.matrix() * hat(xi);
  d.Pi_dot = plant::lie_poisson_rhs(plant.inertia, plant.actuation, s.Pi, s.u, tau);
  d.u_dot = s.u_dot;
  d.u_ddot = u_ddot(w, plant, s);
  d.p_Pi_dot = pPi_rhs(w, plant.inertia, s, ref, t);
  d.p_xi_dot = pXi_rhs(w, s.g, xi, s.p_xi, ref, t);
  return d;
}

std::pair<double, double> first_constraint_check(const CostWeights& w,
                                                 const plant::ActuationModel& act,
                                                 const OCPState& s, const Vec4& tau,
                                                 double p_u) {
  const Vec4 dH_dtau = w.c2 * tau + plant::torque_map(act, s.u).transpose() * s.p_Pi;
  return {dH_dtau.norm(), std::abs(p_u + w.c1 * s.u_dot)};
}

namespace {

// State in the embedding R^{3x3} used by the RK4 stages.
struct Flat {
  Mat3 g;
  Vec3 Pi;
  double u;
  double v;
  Vec3 p_Pi;
  Vec3 p_xi;
};

OCPDerivative field(const CostWeights& w, const plant::Plant& plant, const Reference& ref,
                    double t, const Flat& f) {
  OCPState s;
  // Stage values of g may leave SO(3) by O(h^5); project for evaluation.
  s.g = liealg::orthogonality_error(f.g) > liealg::kRotationTol ? liealg::orthonormalize(f.g)
                                                                 : Rotation(f.g);
  s.Pi = f.Pi;
  s.u = f.u;
  s.u_dot = f.v;
  s.p_Pi = f.p_Pi;
  s.p_xi = f.p_xi;
  OCPDerivative d = necessary_rhs(w, plant, ref, t, s);
  // Use the unprojected stage matrix for the kinematics.
  d.g_dot = f.g * hat(plant::inertia_inv(plant.inertia, f.u).cwiseProduct(f.Pi));
  return d;
}

Flat axpy(const Flat& f, double a, const OCPDerivative& d) {
  return {f.g + a * d.g_dot,   f.Pi + a * d.Pi_dot,     f.u + a * d.u_dot,
          f.v + a * d.u_ddot,  f.p_Pi + a * d.p_Pi_dot, f.p_xi + a * d.p_xi_dot};
}

}  // namespace

OCPState rk4_extremal_step(const CostWeights& w, const plant::Plant& plant,
                           const Reference& ref, double t, const OCPState& s, double h) {
  const Flat f0{s.g.matrix(), s.Pi, s.u, s.u_dot, s.p_Pi, s.p_xi};
  const OCPDerivative k1 = field(w, plant, ref, t, f0);
  const OCPDerivative k2 = field(w, plant, ref, t + 0.5 * h, axpy(f0, 0.5 * h, k1));
  const OCPDerivative k3 = field(w, plant, ref, t + 0.5 * h, axpy(f0, 0.5 * h, k2));
  const OCPDerivative k4 = field(w, plant, ref, t + h, axpy(f0, h, k3));
  Flat f = f0;
  f = axpy(f, h / 6.0, k1);
  f = axpy(f, h / 3.0, k2);
  f = axpy(f, h / 3.0, k3);
  f = axpy(f, h / 6.0, k4);
  if (!f.g.allFinite() || !f.Pi.allFinite() || !f.p_Pi.allFinite() || !f.p_xi.allFinite() ||
      !std::isfinite(f.u) || !std::isfinite(f.v)) {
    throw NonFinite("rk4_extremal_step: extremal diverged");
  }
  OCPState out;
  out.g = liealg::orthogonality_error(f.g) > liealg::kRotationTol ? liealg::orthonormalize(f.g)
                                                                   : Rotation(f.g);
  out.Pi = f.Pi;
  out.u = f.u;
  out.u_dot = f.v;
  out.p_Pi = f.p_Pi;
  out.p_xi = f.p_xi;
  return out;
}

std::vector<OCPState> integrate_extremal(const CostWeights& w, const plant::Plant& plant,
                                         const Reference& ref, const OCPState& s0,
                                         double T, double h) {
  if (!(h > 0.0)) throw ValidationError("integrate_extremal: h must be positive");
  const long steps = std::lround(T / h);
  std::vector<OCPState> out;
  out.reserve(steps + 1);
  out.push_back(s0);
  for (long k = 0; k < steps; ++k) {
    out.push_back(rk4_extremal_step(w, plant, ref, k * h, out.back(), h));
  }
  return out;
}

}  // namespace foldocp::ocp
