#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "foldocp/harness/diagnostics.hpp"
#include "foldocp/plant.hpp"
#include "test_util.hpp"

using namespace foldocp;
using namespace foldocp::plant;
using foldocp::testing::random_vec;
using foldocp::testing::random_vec4;
using foldocp::testing::Rng;
using foldocp::testing::uniform;

TEST(Plant, CalibratedInertiaAtNominalArmAngle) {
  const Plant p = Plant::calibrated();
  const Vec3 I = inertia_diag(p.inertia, kNominalArmAngle);
  EXPECT_NEAR(I(0), 0.034, 1e-12);
  EXPECT_NEAR(I(1), 0.034, 1e-12);
  EXPECT_NEAR(I(2), 0.056, 1e-12);
}

TEST(Plant, InertiaDerivativesMatchFiniteDifferences) {
  const Plant p = Plant::calibrated();
  Rng rng(11);
  const double eps = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double u = uniform(rng, -1.4, 1.4);
    const Vec3 fd = (inertia_diag(p.inertia, u + eps) - inertia_diag(p.inertia, u - eps)) / (2 * eps);
    EXPECT_LT((fd - d_inertia_du(p.inertia, u)).norm(), 1e-9);
    const Vec3 fdi = (inertia_inv(p.inertia, u + eps) - inertia_inv(p.inertia, u - eps)) / (2 * eps);
    EXPECT_LT((fdi - d_inertia_inv_du(p.inertia, u)).norm(), 1e-6);
    const Mat34 fdb = (torque_map(p.actuation, u + eps) - torque_map(p.actuation, u - eps)) / (2 * eps);
    EXPECT_LT((fdb - d_torque_map_du(p.actuation, u)).norm(), 1e-9);
  }
}

TEST(Plant, FreeLiePoissonFlowKeepsCasimirAndEnergy) {
  const Plant p = Plant::calibrated();
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const double u = uniform(rng, -1.4, 1.4);
    const Vec3 Pi = random_vec(rng, 1.0);
    const Vec3 rhs = lie_poisson_rhs(p.inertia, p.actuation, Pi, u, Vec4::Zero());
    EXPECT_NEAR(Pi.dot(rhs), 0.0, 1e-13);
    EXPECT_NEAR(inertia_inv(p.inertia, u).cwiseProduct(Pi).dot(rhs), 0.0, 1e-11);
  }
}

TEST(Plant, EulerPoincareAgreesWithLiePoissonAtFixedArm) {
  const Plant p = Plant::calibrated();
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const double u = uniform(rng, -1.4, 1.4);
    const Vec3 omega = random_vec(rng, 2.0);
    const Vec4 tau = random_vec4(rng, 1.0);
    const Vec3 I = inertia_diag(p.inertia, u);
    const Vec3 lhs = I.cwiseProduct(euler_poincare_rhs(p.inertia, p.actuation, omega, u, 0.0, tau));
    const Vec3 rhs = lie_poisson_rhs(p.inertia, p.actuation, I.cwiseProduct(omega), u, tau);
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
  }
}

TEST(Plant, Rk4IsFourthOrder) {
  const Plant p = Plant::calibrated();
  const PlantState s0{Rotation(), Vec3(0.3, 0.1, 0.2)};
  const InputProgram in = [](double t) {
    ControlInput c;
    c.u = kNominalArmAngle + 0.2 * std::sin(t);
    c.u_dot = 0.2 * std::cos(t);
    c.tau = Vec4(0.1 * std::cos(t), 0.05, -0.02, 0.03 * t);
    return c;
  };
  const double T = 1.0;
  const auto ref = integrate(p, s0, in, T, 1e-4).states.back();
  double prev = 0.0;
  for (const double h : {0.04, 0.02, 0.01}) {
    const auto s = integrate(p, s0, in, T, h).states.back();
    const double err = (s.Pi - ref.Pi).norm() + (s.g.matrix() - ref.g.matrix()).norm();
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 12.0);
      EXPECT_LT(prev / err, 20.0);
    }
    prev = err;
  }
}

TEST(Plant, PlanarRotationMatchesClosedForm) {
  const Plant p = Plant::calibrated();
  const double u = 0.6;
  const double omega0 = 0.3;
  const Vec3 I = inertia_diag(p.inertia, u);
  const PlantState s0{Rotation(), Vec3(0.0, I(1) * omega0, 0.0)};
  // tau1 = tau2 only produces torque about the second axis
  const InputProgram in = [u](double t) {
    ControlInput c;
    c.u = u;
    c.tau = Vec4(0.1 * std::cos(3 * t), 0.1 * std::cos(3 * t), 0.0, 0.0);
    return c;
  };
  const double T = 2.0;
  const auto s = integrate(p, s0, in, T, 1e-3).states.back();
  const double integral = 0.2 * std::sin(3 * T) / 3.0;
  const double omega2 = planar_omega2_closed_form(p.inertia, p.actuation, u, integral, omega0);
  EXPECT_NEAR(s.Pi(1) / I(1), omega2, 1e-10);
  EXPECT_NEAR(s.Pi(0), 0.0, 1e-14);
  EXPECT_NEAR(s.Pi(2), 0.0, 1e-14);
}

TEST(Plant, IntegrateStaysOnTheGroup) {
  const Plant p = Plant::calibrated();
  const PlantState s0{Rotation(), Vec3(0.3, -0.2, 0.1)};
  const InputProgram in = [](double) { return ControlInput{}; };
  const auto traj = integrate(p, s0, in, 5.0, 0.01);
  ASSERT_EQ(traj.states.size(), 501u);
  for (const auto& s : traj.states) EXPECT_LT(s.g.orthogonality_error(), 1e-9);
}

TEST(Plant, ValidationRejectsBadParameters) {
  Plant p = Plant::calibrated();
  p.inertia.Ic = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = Plant::calibrated();
  p.inertia.m = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Plant, DiagnosticsSuitePasses) {
  const auto sum = harness::run_checks("plant", 0);
  for (const auto& c : sum.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}
