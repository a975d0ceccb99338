#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "foldocp/harness/diagnostics.hpp"
#include "foldocp/liealg.hpp"
#include "test_util.hpp"

using namespace foldocp;
using namespace foldocp::liealg;
using foldocp::testing::random_ball;
using foldocp::testing::random_vec;
using foldocp::testing::Rng;

TEST(Liealg, HatVeeRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = random_vec(rng, 10.0);
    const Mat3 m = hat(v);
    EXPECT_LT((m + m.transpose()).norm(), 1e-15);
    EXPECT_LT((vee(m) - v).norm(), 1e-15);
    const Vec3 w = random_vec(rng, 1.0);
    EXPECT_LT((m * w - v.cross(w)).norm(), 1e-13);
  }
}

TEST(Liealg, VeeRejectsNonSkew) {
  Mat3 m = hat(Vec3(1, 2, 3));
  m(0, 1) += 1e-3;
  EXPECT_THROW(vee(m), SkewViolation);
}

TEST(Liealg, CayleyIsOrthogonalWithUnitDeterminant) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const Mat3 c = cay(random_ball(rng, 20.0)).matrix();
    EXPECT_LT((c.transpose() * c - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(c.determinant(), 1.0, 1e-12);
  }
}

TEST(Liealg, CayleyMatchesLinearSolve) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = random_ball(rng, 5.0);
    // (I - X)^{-1} (I + X) via a dense solve
    const Mat3 X = hat(x);
    const Mat3 ref = (Mat3::Identity() - X).partialPivLu().solve(Mat3::Identity() + X);
    EXPECT_LT((cay(x).matrix() - ref).norm(), 1e-12);
  }
}

TEST(Liealg, CayleyInverseRoundTrip) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = random_ball(rng, 5.0);
    EXPECT_LT((cay_inv(cay(x)) - x).norm(), 1e-10 * (1 + x.norm()));
  }
}

TEST(Liealg, DcayAgreesWithCentralDifferences) {
  Rng rng(5);
  const double eps = 1e-6;
  for (int i = 0; i < 500; ++i) {
    const Vec3 x = random_ball(rng, 3.0);
    const Vec3 v = random_ball(rng, 1.0);
    const Mat3 D = (cay(x + eps * v).matrix() - cay(x - eps * v).matrix()) / (2 * eps) *
                   cay(x).matrix().transpose();
    const Vec3 fd = 0.5 * vee(0.5 * (D - D.transpose()));
    const Vec3 ex = dcay(x, v);
    EXPECT_LT((fd - ex).norm(), 1e-6 * ex.norm());
    EXPECT_LT((dcay_inv(x, ex) - v).norm(), 1e-10);
  }
}

TEST(Liealg, DcayAtOriginIsIdentity) {
  EXPECT_LT((dcay_matrix(Vec3::Zero()) - Mat3::Identity()).norm(), 1e-15);
}

TEST(Liealg, PrintedDcayIsTheUnnormalizedDifferential) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = random_ball(rng, 2.0);
    const Mat3 P = dcay_printed(x);
    EXPECT_LT((P - 2.0 * dcay_matrix(x)).norm(), 1e-12);
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = Vec3::Unit(j);
      EXPECT_LT((P * e - dcay_raw_matrix_calculus(x, e)).norm(), 1e-12);
    }
  }
}

TEST(Liealg, CoadjointIsDualOfAdjoint) {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Vec3 x = random_vec(rng, 1.0), p = random_vec(rng, 1.0), y = random_vec(rng, 1.0);
    EXPECT_NEAR(coad(x, p).dot(y), p.dot(ad(x, y)), 1e-14);
  }
}

TEST(Liealg, ExpLogRoundTripAndRodrigues) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const Vec3 x = random_ball(rng, 3.0);
    const Eigen::AngleAxisd aa(x.norm(), x.normalized());
    EXPECT_LT((exp_so3(x).matrix() - aa.toRotationMatrix()).norm(), 1e-12);
    EXPECT_LT((log_so3(exp_so3(x)) - x).norm(), 1e-9);
  }
}

TEST(Liealg, RetractionDifferentialsMatchFiniteDifferences) {
  Rng rng(9);
  const double eps = 1e-6;
  for (const Retraction r : {Retraction::Cayley, Retraction::Exponential}) {
    for (int i = 0; i < 200; ++i) {
      const Vec3 xi = random_ball(rng, 1.5);
      const Vec3 v = random_ball(rng, 1.0);
      const Mat3 D = (retract(xi + eps * v, r).matrix() - retract(xi - eps * v, r).matrix()) /
                     (2 * eps) * retract(xi, r).matrix().transpose();
      const Vec3 fd = vee(0.5 * (D - D.transpose()));
      EXPECT_LT((dretract(xi, r) * v - fd).norm(), 1e-7);
      EXPECT_LT((dretract_inv(xi, r) * dretract(xi, r) - Mat3::Identity()).norm(), 1e-10);
    }
  }
}

TEST(Liealg, OrthonormalizeRestoresGroupMembership) {
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    Mat3 m = cay(random_ball(rng, 3.0)).matrix();
    m += 1e-7 * Mat3::Random();
    const Mat3 o = orthonormalize(m).matrix();
    EXPECT_LT(orthogonality_error(o), 1e-13);
    EXPECT_LT((o - m).norm(), 1e-6);
  }
}

TEST(Liealg, RotationRejectsNonOrthogonal) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.1;
  EXPECT_ANY_THROW(Rotation{m});
}

TEST(Liealg, DiagnosticsSuitePasses) {
  const auto sum = harness::run_checks("liealg", 0);
  for (const auto& c : sum.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}
