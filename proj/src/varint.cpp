#include "foldocp/varint.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace foldocp::varint {

using liealg::hat;

void GridSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid.h_s must be > 0");
  if (N < 2) throw ValidationError("grid.N must be >= 2");
  if (!std::isfinite(T())) throw ValidationError("grid horizon is not finite");
}

DiscreteTrajectory DiscreteTrajectory::zeros(const GridSpec& grid) {
  grid.validate();
  DiscreteTrajectory traj;
  traj.grid = grid;
  traj.knots.resize(grid.N + 1);
  traj.multipliers.resize(grid.N);
  return traj;
}

void DiscreteTrajectory::validate() const {
  grid.validate();
  if (static_cast<int>(knots.size()) != grid.N + 1 ||
      static_cast<int>(multipliers.size()) != grid.N) {
    throw ValidationError("trajectory array lengths do not match the grid");
  }
  for (const auto& k : knots) {
    if (!k.Pi.allFinite() || !std::isfinite(k.u) || !k.tau.allFinite()) {
      throw NonFinite("trajectory knot has non-finite entries");
    }
  }
  for (const auto& m : multipliers) {
    if (!m.lambda.allFinite() || !m.mu.allFinite()) {
      throw NonFinite("trajectory multiplier has non-finite entries");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

Vec3 dlp_momentum(const Vec3& inertia, double h, const Vec3& omega, Retraction r) {
  return liealg::dretract_inv(h * omega, r).transpose() * inertia.cwiseProduct(omega);
}

}  // namespace

DlpStep free_dlp_step(const Vec3& inertia, double h, const Rotation& g, const Vec3& m,
                      Retraction r) {
  if (!(h > 0.0)) throw ValidationError("free_dlp_step: h must be positive");
  const double scale = std::max(1.0, m.norm());
  Vec3 omega = m.cwiseQuotient(inertia);
  Vec3 res = dlp_momentum(inertia, h, omega, r) - m;
  int it = 0;
  for (; it < 50 && res.norm() > 1e-14 * scale; ++it) {
    Mat3 jac;
    if (r == Retraction::Cayley) {
      const Vec3 x = 0.5 * h * omega;
      const Vec3 Pi = inertia.cwiseProduct(omega);
      jac = liealg::dcay_inv_matrix(x).transpose() * inertia.asDiagonal();
      jac += 0.5 * h * (-hat(Pi) + x.dot(Pi) * Mat3::Identity() + x * Pi.transpose());
    } else {
      for (int j = 0; j < 3; ++j) {
        const double e = 1e-7 * std::max(1.0, std::abs(omega(j)));
        Vec3 wp = omega, wm = omega;
        wp(j) += e;
        wm(j) -= e;
        jac.col(j) = (dlp_momentum(inertia, h, wp, r) - dlp_momentum(inertia, h, wm, r)) / (2 * e);
      }
    }
    const Vec3 step = jac.partialPivLu().solve(-res);
    double t = 1.0;
    Vec3 trial_res;
    while (true) {
      trial_res = dlp_momentum(inertia, h, omega + t * step, r) - m;
      if (trial_res.norm() < res.norm() || t < 1e-8) break;
      t *= 0.5;
    }
    omega += t * step;
    res = trial_res;
    if ((t * step).norm() < 1e-16 * std::max(1.0, omega.norm())) break;
  }
  if (!(res.norm() <= 1e-12 * scale)) {
    throw NoConvergence("free_dlp_step: implicit momentum equation did not converge");
  }
  DlpStep out;
  out.omega = omega;
  out.Pi = inertia.cwiseProduct(omega);
  out.g = g * liealg::retract(h * omega, r);
  out.m = liealg::dretract_inv(-h * omega, r).transpose() * out.Pi;
  out.iterations = it;
  return out;
}

// ---------------------------------------------------------------------------

double discrete_cost(const DiscreteProblem& p, int k, const DiscreteKnot& a,
                     const DiscreteKnot& b) {
  const auto& w = p.weights;
  const double h = p.grid.h;
  const double ta = p.grid.t(k), tb = p.grid.t(k + 1);
  const double du = b.u - a.u;
  const double att = ocp::attitude_error_sq(p.ref.g_d(ta), a.g) +
                     ocp::attitude_error_sq(p.ref.g_d(tb), b.g);
  const double mom = (a.Pi - p.ref.Pi_d(ta)).squaredNorm() + (b.Pi - p.ref.Pi_d(tb)).squaredNorm();
  const double taus = a.tau.squaredNorm() + b.tau.squaredNorm();
  return w.c1 / (2.0 * h) * du * du + h * (0.25 * w.c2 * taus + 0.25 * w.c3 * att + 0.25 * w.c4 * mom);
}

Vec3 residual_phi123(const plant::Plant& plant, double h, const DiscreteKnot& a,
                     const DiscreteKnot& b) {
  const auto& in = plant.inertia;
  const auto& act = plant.actuation;
  return (b.Pi - a.Pi) / h + 0.5 * plant::gyroscopic(in, a.Pi, a.u) +
         0.5 * plant::gyroscopic(in, b.Pi, b.u) - 0.5 * plant::body_torque(act, a.u, a.tau) -
         0.5 * plant::body_torque(act, b.u, b.tau);
}

Vec3 residual_phi123_componentwise(const plant::Plant& plant, double h, const DiscreteKnot& a,
                                   const DiscreteKnot& b) {
  auto half_terms = [&](const DiscreteKnot& s) {
    const Vec3 I = plant::inertia_diag(plant.inertia, s.u);
    const double su = std::sin(s.u), cu = std::cos(s.u);
    const double l = plant.actuation.l, k1 = plant.actuation.kappa1, k2 = plant.actuation.kappa2;
    const auto& t = s.tau;
    const Vec3 F(l * k1 * su * (-t(0) + t(1) + t(2) - t(3)),
                 l * k1 * cu * (t(0) + t(1) - t(2) - t(3)),
                 l * k2 * (t(0) - t(1) + t(2) - t(3)));
    const auto& P = s.Pi;
    return Vec3(-(I(1) - I(2)) / (2 * I(2) * I(1)) * P(1) * P(2) - 0.5 * F(0),
                -(I(2) - I(0)) / (2 * I(2) * I(0)) * P(2) * P(0) - 0.5 * F(1),
                -(I(0) - I(1)) / (2 * I(0) * I(1)) * P(0) * P(1) - 0.5 * F(2));
  };
  return (b.Pi - a.Pi) / h + half_terms(a) + half_terms(b);
}

Vec3 residual_phi4(const plant::Plant& plant, double h, const DiscreteKnot& a,
                   const DiscreteKnot& b, Retraction r) {
  const Vec3 xi = plant::inertia_inv(plant.inertia, a.u).cwiseProduct(a.Pi) +
                  plant::inertia_inv(plant.inertia, b.u).cwiseProduct(b.Pi);
  return liealg::retract_inv(a.g.inverse() * b.g, r) - 0.5 * h * xi;
}

double interval_extended_cost(const DiscreteProblem& p, int k, const DiscreteKnot& a,
                              const DiscreteKnot& b, const Multipliers& m) {
  const double h = p.grid.h;
  return h * m.lambda.dot(residual_phi123(p.plant, h, a, b)) +
         m.mu.dot(residual_phi4(p.plant, h, a, b, p.retraction)) - discrete_cost(p, k, a, b);
}

double extended_cost(const DiscreteProblem& p, const DiscreteTrajectory& traj) {
  double s = 0.0;
  for (int k = 0; k < traj.grid.N; ++k) {
    s += interval_extended_cost(p, k, traj.knots[k], traj.knots[k + 1], traj.multipliers[k]);
  }
  return s;
}

double total_cost(const DiscreteProblem& p, const DiscreteTrajectory& traj) {
  double s = 0.0;
  for (int k = 0; k < traj.grid.N; ++k) s += discrete_cost(p, k, traj.knots[k], traj.knots[k + 1]);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

// d n / d Pi for n = (J o Pi) x Pi
Mat3 gyro_jacobian(const Vec3& J, const Vec3& Pi) {
  return hat(J.cwiseProduct(Pi)) - hat(Pi) * J.asDiagonal();
}

struct KnotTerms {
  Vec3 J, dJ;
  Mat3 NPi;
  Vec3 dn;  // d n / d u
  plant::Mat34 B, dB;
};

KnotTerms knot_terms(const plant::Plant& plant, const DiscreteKnot& s) {
  KnotTerms t;
  t.J = plant::inertia_inv(plant.inertia, s.u);
  t.dJ = plant::d_inertia_inv_du(plant.inertia, s.u);
  t.NPi = gyro_jacobian(t.J, s.Pi);
  t.dn = t.dJ.cwiseProduct(s.Pi).cross(s.Pi);
  t.B = plant::torque_map(plant.actuation, s.u);
  t.dB = plant::d_torque_map_du(plant.actuation, s.u);
  return t;
}

}  // namespace

IntervalGradient interval_gradient(const DiscreteProblem& p, int k, const DiscreteKnot& a,
                                   const DiscreteKnot& b, const Multipliers& m) {
  const auto& w = p.weights;
  const double h = p.grid.h;
  const double ta = p.grid.t(k), tb = p.grid.t(k + 1);
  const KnotTerms A = knot_terms(p.plant, a);
  const KnotTerms Bt = knot_terms(p.plant, b);
  const Vec3& lam = m.lambda;
  const Vec3& mu = m.mu;

  const Rotation fr = a.g.inverse() * b.g;
  const Mat3& f = fr.matrix();
  const Vec3 y = liealg::retract_inv(fr, p.retraction);
  const Mat3 Dt = liealg::dretract_inv(y, p.retraction).transpose();

  IntervalGradient out;
  out.a.segment<3>(0) = -Dt * mu - 0.25 * h * w.c3 * ocp::attitude_error_sq_gradient(p.ref.g_d(ta), a.g);
  out.b.segment<3>(0) = f.transpose() * Dt * mu -
                        0.25 * h * w.c3 * ocp::attitude_error_sq_gradient(p.ref.g_d(tb), b.g);

  out.a.segment<3>(3) = -lam + 0.5 * h * A.NPi.transpose() * lam - 0.5 * h * A.J.cwiseProduct(mu) -
                        0.5 * h * w.c4 * (a.Pi - p.ref.Pi_d(ta));
  out.b.segment<3>(3) = lam + 0.5 * h * Bt.NPi.transpose() * lam - 0.5 * h * Bt.J.cwiseProduct(mu) -
                        0.5 * h * w.c4 * (b.Pi - p.ref.Pi_d(tb));

  const double du = (b.u - a.u) / h;
  out.a(6) = 0.5 * h * lam.dot(A.dn - A.dB * a.tau) - 0.5 * h * mu.dot(A.dJ.cwiseProduct(a.Pi)) +
             w.c1 * du;
  out.b(6) = 0.5 * h * lam.dot(Bt.dn - Bt.dB * b.tau) - 0.5 * h * mu.dot(Bt.dJ.cwiseProduct(b.Pi)) -
             w.c1 * du;

  out.a.segment<4>(7) = -0.5 * h * A.B.transpose() * lam - 0.5 * h * w.c2 * a.tau;
  out.b.segment<4>(7) = -0.5 * h * Bt.B.transpose() * lam - 0.5 * h * w.c2 * b.tau;

  out.mult.head<3>() = h * residual_phi123(p.plant, h, a, b);
  out.mult.tail<3>() = y - 0.5 * h * (A.J.cwiseProduct(a.Pi) + Bt.J.cwiseProduct(b.Pi));
  return out;
}

double KKTResiduals::max_abs() const {
  double m = 0.0;
  for (const auto& v : knot) m = std::max(m, v.cwiseAbs().maxCoeff());
  for (const auto& v : interval) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

KnotVec knot_gradient(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k) {
  const int N = traj.grid.N;
  KnotVec g = KnotVec::Zero();
  if (k > 0) {
    g += interval_gradient(p, k - 1, traj.knots[k - 1], traj.knots[k], traj.multipliers[k - 1]).b;
  }
  if (k < N) {
    g += interval_gradient(p, k, traj.knots[k], traj.knots[k + 1], traj.multipliers[k]).a;
  }
  return g;
}

KKTResiduals kkt_residuals_exact(const DiscreteProblem& p, const DiscreteTrajectory& traj) {
  const int N = traj.grid.N;
  KKTResiduals r;
  r.knot.assign(N + 1, KnotVec::Zero());
  r.interval.resize(N);
  for (int k = 0; k < N; ++k) {
    const IntervalGradient ig =
        interval_gradient(p, k, traj.knots[k], traj.knots[k + 1], traj.multipliers[k]);
    r.knot[k] += ig.a;
    r.knot[k + 1] += ig.b;
    r.interval[k] = ig.mult;
  }
  return r;
}

Vec4 tau_k_star(const ocp::CostWeights& w, const plant::ActuationModel& act,
                const Vec3& lambda_bar, double u) {
  if (!(w.c2 > 0.0)) throw ValidationError("tau_k_star: c2 must be > 0");
  return -plant::torque_map(act, u).transpose() * lambda_bar / w.c2;
}

Vec3 lambda_bar(const DiscreteTrajectory& traj, int k) {
  const int N = traj.grid.N;
  if (k <= 0) return traj.multipliers.front().lambda;
  if (k >= N) return traj.multipliers.back().lambda;
  return 0.5 * (traj.multipliers[k - 1].lambda + traj.multipliers[k].lambda);
}

// ---------------------------------------------------------------------------

Vec4 tau_k_printed(const ocp::CostWeights& w, const plant::ActuationModel& act,
                   const Vec3& lambda, double u) {
  const double l = act.l, k1 = act.kappa1, k2 = act.kappa2;
  const double s = std::sin(u), c = std::cos(u);
  const Vec3& L = lambda;
  return -Vec4(-L(0) * l * k1 * s + L(1) * k1 * l * c + L(2) * l * k2,
               L(0) * l * k1 * s + L(1) * k1 * l * c - L(2) * l * k2,
               L(0) * l * k1 * l * s - L(1) * k1 * l * c + L(2) * l * k2,
               L(0) * l * k1 * l * s + L(1) * k1 * l * c + L(2) * l * k2) /
         w.c2;
}

namespace {

Mat3 dcay_printed_inverse(const Vec3& y) {
  return 0.5 * liealg::dcay_inv_matrix(y);
}

}  // namespace

PrintedKnotResiduals kkt_residuals_printed(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                       int k) {
  const int N = traj.grid.N;
  if (k < 1 || k > N - 1) throw ValidationError("kkt_residuals_printed: interior knots only");
  const auto& w = p.weights;
  const auto& in = p.plant.inertia;
  const double h = p.grid.h;
  const double t = p.grid.t(k);
  const DiscreteKnot& km = traj.knots[k - 1];
  const DiscreteKnot& kk = traj.knots[k];
  const DiscreteKnot& kp = traj.knots[k + 1];
  const Vec3& lk = traj.multipliers[k].lambda;
  const Vec3& lm = traj.multipliers[k - 1].lambda;
  const Vec3& muk = traj.multipliers[k].mu;
  const Vec3& mum = traj.multipliers[k - 1].mu;

  PrintedKnotResiduals r;
  r.tau = -w.c2 * (kk.tau - tau_k_printed(w, p.plant.actuation, lk, kk.u));

  const Vec3 I = plant::inertia_diag(in, kk.u);
  auto alpha = [&](int i, int j) { return (I(i) + I(j)) / (2.0 * I(i) * I(j)); };
  const Vec3& P = kk.Pi;
  const Vec3 xt = 0.5 * h * (plant::inertia_inv(in, kk.u).cwiseProduct(kk.Pi) +
                             plant::inertia_inv(in, kp.u).cwiseProduct(kp.Pi));
  const Vec3 yt = 0.5 * h * (plant::inertia_inv(in, km.u).cwiseProduct(km.Pi) +
                             plant::inertia_inv(in, kk.u).cwiseProduct(kk.Pi));
  const Vec3 mu_terms = liealg::dcay_printed(xt) * muk + liealg::dcay_printed(yt) * mum;
  const Vec3 d = kk.Pi - p.ref.Pi_d(t);
  Vec3 rhs;
  rhs(0) = -lk(1) * alpha(2, 0) * P(2) - lk(2) * alpha(1, 0) * P(1) - lm(1) * alpha(2, 0) * P(2) -
           lm(2) * alpha(1, 0) * P(1);
  rhs(1) = lk(1) * alpha(2, 1) * P(2) - lk(2) * alpha(1, 0) * P(0) - lm(1) * alpha(2, 1) * P(2) -
           lm(2) * alpha(1, 0) * P(0);
  rhs(2) = lk(1) * alpha(2, 1) * P(1) - lk(2) * alpha(2, 0) * P(0) - lm(1) * alpha(2, 1) * P(1) -
           lm(2) * alpha(2, 0) * P(0);
  rhs -= mu_terms + w.c4 * d;
  r.lambda = rhs - (lk - lm) / h;

  const double l = in.l, m = in.m, Ic = in.Ic, u = kk.u;
  const double D1 = Ic + 4 * l * l * std::sin(u) * std::sin(u) * m;
  const double D2 = Ic + 4 * l * l * std::cos(u) * std::cos(u) * m;
  const double q1 = 4 * l * l * std::cos(u) * m / (D1 * D1);
  const double q2 = 4 * l * l * std::sin(u) * m / (D2 * D2);
  r.u = w.c1 / h * (kp.u - 2 * kk.u + km.u) - q1 * h * muk(0) * P(0) - q2 * h * muk(1) * P(1) -
        lk(0) * q1 * P(0) * P(2) - lk(1) * q2 * P(1) * P(2) - lk(2) * q2 * P(0) * P(1) -
        lm(0) * q1 * P(0) * P(2) - lm(1) * q2 * P(1) * P(2) - lm(2) * q2 * P(0) * P(1) -
        q1 * h * mum(0) * P(0) - q2 * h * mum(1) * P(1);

  const Mat3 Q = p.ref.g_d(t).matrix().transpose() * kk.g.matrix();
  const Mat3 fk = kk.g.matrix().transpose() * kp.g.matrix();
  const Mat3 fm = km.g.matrix().transpose() * kk.g.matrix();
  const Mat3 Dk = dcay_printed_inverse(liealg::cay_inv(fk));
  const Mat3 Dm = dcay_printed_inverse(liealg::cay_inv(fm));
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    r.g(i) = 2 * w.c3 * (Q * hat(e) * Q).trace() + muk.dot(Dk * e) - mum.dot(Dm * fm * e);
  }
  return r;
}

std::vector<DiscrepancyRow> discrepancy_report(const DiscreteProblem& p,
                                               const DiscreteTrajectory& traj) {
  std::vector<DiscrepancyRow> rows = {{"tau (per h)"}, {"lambda (per h)"}, {"u"}, {"g"}};
  const double h = p.grid.h;
  for (int k = 1; k < traj.grid.N; ++k) {
    const PrintedKnotResiduals pr = kkt_residuals_printed(p, traj, k);
    const KnotVec ex = knot_gradient(p, traj, k);
    auto update = [](DiscrepancyRow& row, const Eigen::VectorXd& printed, const Eigen::VectorXd& exact) {
      row.printed_max = std::max(row.printed_max, printed.cwiseAbs().maxCoeff());
      row.exact_max = std::max(row.exact_max, exact.cwiseAbs().maxCoeff());
      row.deviation = std::max(row.deviation, (printed - exact).cwiseAbs().maxCoeff());
    };
    update(rows[0], pr.tau, ex.segment<4>(7) / h);
    update(rows[1], pr.lambda, ex.segment<3>(3) / h);
    update(rows[2], Eigen::VectorXd::Constant(1, pr.u), ex.segment<1>(6));
    update(rows[3], pr.g, ex.segment<3>(0));
  }
  return rows;
}

// ---------------------------------------------------------------------------

DiscreteKnot trapezoidal_step(const plant::Plant& plant, double h, const DiscreteKnot& a,
                              double u_b, const Vec4& tau_b, Retraction r) {
  const auto& in = plant.inertia;
  DiscreteKnot b;
  b.u = u_b;
  b.tau = tau_b;
  const Vec3 Jb = plant::inertia_inv(in, u_b);
  Vec3 Pi = a.Pi;
  const double scale = std::max(1.0, a.Pi.norm()) / h;
  for (int it = 0;; ++it) {
    b.Pi = Pi;
    const Vec3 res = residual_phi123(plant, h, a, b);
    if (res.norm() <= 1e-14 * scale) break;
    if (it == 50) throw NoConvergence("trapezoidal_step: momentum update did not converge");
    const Mat3 jac = Mat3::Identity() / h + 0.5 * gyro_jacobian(Jb, Pi);
    const Vec3 step = jac.partialPivLu().solve(-res);
    Pi += step;
    if (step.norm() <= 1e-16 * std::max(1.0, Pi.norm())) {
      b.Pi = Pi;
      break;
    }
  }
  if (!b.Pi.allFinite()) throw NonFinite("trapezoidal_step: momentum diverged");
  const Vec3 xi = 0.5 * h * (plant::inertia_inv(in, a.u).cwiseProduct(a.Pi) + Jb.cwiseProduct(b.Pi));
  b.g = a.g * liealg::retract(xi, r);
  return b;
}

double regularity_block(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k) {
  DiscreteKnot a = traj.knots[k];
  DiscreteKnot b = traj.knots[k + 1];
  const double e = 1e-6 * std::max(1.0, std::abs(b.u));
  const double u0 = b.u;
  b.u = u0 + e;
  const double gp = interval_gradient(p, k, a, b, traj.multipliers[k]).a(6);
  b.u = u0 - e;
  const double gm = interval_gradient(p, k, a, b, traj.multipliers[k]).a(6);
  return (gp - gm) / (2 * e);
}

}  // namespace foldocp::varint
