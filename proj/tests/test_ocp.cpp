#include <gtest/gtest.h>

#include <cmath>

#include "foldocp/harness/diagnostics.hpp"
#include "foldocp/harness/euler.hpp"
#include "foldocp/ocp.hpp"
#include "test_util.hpp"

using namespace foldocp;
using namespace foldocp::ocp;
using foldocp::testing::random_vec;
using foldocp::testing::random_vec4;
using foldocp::testing::Rng;
using foldocp::testing::uniform;

namespace {

OCPState sample_state(Rng& rng) {
  OCPState s;
  s.g = liealg::cay(random_vec(rng, 0.5));
  s.Pi = random_vec(rng, 0.1);
  s.u = uniform(rng, 0.3, 1.2);
  s.u_dot = uniform(rng, -0.5, 0.5);
  s.p_Pi = random_vec(rng, 0.1);
  s.p_xi = random_vec(rng, 0.05);
  return s;
}

// Minimized Hamiltonian written out from the running cost and the dynamics,
// with p_u = -c1 u_dot.
double hamiltonian_oracle(const CostWeights& w, const plant::Plant& pl, const Reference& ref,
                          const OCPState& s) {
  const plant::Vec4 tau = -plant::torque_map(pl.actuation, s.u).transpose() * s.p_Pi / w.c2;
  const Vec3 xi = plant::inertia_inv(pl.inertia, s.u).cwiseProduct(s.Pi);
  const Vec3 f = plant::lie_poisson_rhs(pl.inertia, pl.actuation, s.Pi, s.u, tau);
  const double C = running_cost(w, ref, 0.0, s.g, s.Pi, s.u_dot, tau);
  return C + s.p_Pi.dot(f) + s.p_xi.dot(xi) - w.c1 * s.u_dot * s.u_dot;
}

}  // namespace

TEST(Ocp, TauStarIsStationaryForTheHamiltonian) {
  const auto pl = plant::Plant::calibrated();
  const CostWeights w;
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const OCPState s = sample_state(rng);
    const Vec4 tau = tau_star(w, pl.actuation, s.p_Pi, s.u);
    // C + <p_Pi, B tau> is the tau-dependent part
    auto Htau = [&](const Vec4& t) {
      return 0.5 * w.c2 * t.squaredNorm() + s.p_Pi.dot(plant::torque_map(pl.actuation, s.u) * t);
    };
    for (int j = 0; j < 20; ++j) {
      const Vec4 d = 1e-3 * random_vec4(rng, 1.0);
      EXPECT_GE(Htau(tau + d), Htau(tau));
    }
    EXPECT_LT(first_constraint_check(w, pl.actuation, s, tau, -w.c1 * s.u_dot).first, 1e-14);
    EXPECT_LT((tau_printed(w, pl.actuation, s.p_Pi, s.u) + tau).norm(), 1e-15);
  }
}

TEST(Ocp, AMatrixIsTheGyroscopicGradient) {
  const auto pl = plant::Plant::calibrated();
  Rng rng(22);
  const double eps = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double u = uniform(rng, 0.2, 1.3);
    const Vec3 Pi = random_vec(rng, 1.0), p = random_vec(rng, 1.0);
    auto f = [&](const Vec3& P) { return p.dot(P.cross(plant::inertia_inv(pl.inertia, u).cwiseProduct(P))); };
    Vec3 fd;
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = eps * Vec3::Unit(j);
      fd(j) = -(f(Pi + e) - f(Pi - e)) / (2 * eps);
    }
    EXPECT_LT((A_matrix(pl.inertia, u, Pi) * p - fd).norm(), 1e-8);
  }
}

TEST(Ocp, AttitudeErrorGradientMatchesChartDifferences) {
  Rng rng(23);
  const double eps = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Rotation gd = liealg::cay(random_vec(rng, 0.7));
    const Rotation g = liealg::cay(random_vec(rng, 0.7));
    Vec3 fd;
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = eps * Vec3::Unit(j);
      fd(j) = (attitude_error_sq(gd, g * liealg::exp_so3(e)) -
               attitude_error_sq(gd, g * liealg::exp_so3(-e))) / (2 * eps);
    }
    EXPECT_LT((attitude_error_sq_gradient(gd, g) - fd).norm(), 1e-7);
  }
}

TEST(Ocp, HamiltonianIsConservedAlongExtremalsForAConstantReference) {
  const auto pl = plant::Plant::calibrated();
  const CostWeights w;
  const Reference ref = Reference::constant(Rotation());
  OCPState s0;
  s0.g = harness::compose(0.3, 0.0, 0.0);
  s0.p_Pi = Vec3(0.0752, 0.0091, 0.0049);
  s0.p_xi = Vec3(0.0227, 0.0027, 0.0020);
  const auto xs = integrate_extremal(w, pl, ref, s0, 0.3, 1e-3);
  const double H0 = hamiltonian_oracle(w, pl, ref, xs.front());
  double drift = 0.0;
  for (const auto& s : xs) drift = std::max(drift, std::abs(hamiltonian_oracle(w, pl, ref, s) - H0));
  EXPECT_LT(drift, 1e-8 * (1.0 + std::abs(H0)));
}

TEST(Ocp, RegularityViolationWithoutArmRatePenalty) {
  const auto pl = plant::Plant::calibrated();
  CostWeights w;
  w.c1 = 0.0;
  Rng rng(24);
  EXPECT_THROW(u_ddot(w, pl, sample_state(rng)), RegularityViolation);
  EXPECT_THROW(w.validate(), ValidationError);
}

TEST(Ocp, DiagnosticsSuitePasses) {
  const auto sum = harness::run_checks("ocp", 0);
  for (const auto& c : sum.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}
