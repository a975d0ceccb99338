#include "foldocp/liealg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace foldocp::liealg {

double orthogonality_error(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).norm();
}

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (!m.allFinite()) {
    throw ValidationError("rotation has non-finite entries");
  }
  if (liealg::orthogonality_error(m) > kRotationTol) {
    throw ValidationError("matrix is not orthogonal within tolerance");
  }
  if (std::abs(m.determinant() - 1.0) > kRotationTol) {
    throw ValidationError("matrix determinant is not +1");
  }
}

Rotation Rotation::inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(m_ * other.m_, Unchecked{});
}

double Rotation::orthogonality_error() const { return liealg::orthogonality_error(m_); }

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m, double tol) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  if (sym.norm() > tol) {
    throw SkewViolation("vee: input matrix is not skew-symmetric");
  }
  const Mat3 skew = 0.5 * (m - m.transpose());
  return Vec3(skew(2, 1), skew(0, 2), skew(1, 0));
}

Vec3 ad(const Vec3& x, const Vec3& y) { return x.cross(y); }

Vec3 coad(const Vec3& x, const Vec3& p) { return p.cross(x); }

Rotation cay(const Vec3& x) {
  const double s = 1.0 / (1.0 + x.squaredNorm());
  const Mat3 X = hat(x);
  return Rotation(Mat3::Identity() + 2.0 * s * X + 2.0 * s * X * X, Rotation::Unchecked{});
}

Mat3 cay_by_solve(const Vec3& x) {
  const Mat3 X = hat(x);
  return (Mat3::Identity() - X).partialPivLu().solve(Mat3::Identity() + X);
}

Vec3 cay_inv(const Mat3& r) {
  const Mat3 plus = r + Mat3::Identity();
  // 1 + trace(R) = 2 (1 + cos(angle)); the chart ends at angle pi.
  if (1.0 + r.trace() < 1e-10) {
    throw OutOfChart("cay_inv: rotation angle at pi is outside the Cayley chart");
  }
  // X = (R - I)(R + I)^{-1}  <=>  (R + I)^T X^T = (R - I)^T
  const Mat3 Xt = plus.transpose().partialPivLu().solve((r - Mat3::Identity()).transpose());
  const Mat3 X = Xt.transpose();
  const Mat3 skew = 0.5 * (X - X.transpose());
  return Vec3(skew(2, 1), skew(0, 2), skew(1, 0));
}

Vec3 cay_inv(const Rotation& r) { return cay_inv(r.matrix()); }

Mat3 dcay_matrix(const Vec3& x) {
  const double s = 1.0 / (1.0 + x.squaredNorm());
  return s * (Mat3::Identity() + hat(x));
}

Vec3 dcay(const Vec3& x, const Vec3& v) { return dcay_matrix(x) * v; }

Mat3 dcay_inv_matrix(const Vec3& x) {
  return Mat3::Identity() - hat(x) + x * x.transpose();
}

Vec3 dcay_inv(const Vec3& x, const Vec3& w) {
  if (!x.allFinite() || !w.allFinite()) {
    throw SingularError("dcay_inv: non-finite argument");
  }
  return dcay_inv_matrix(x) * w;
}

Mat3 dcay_printed(const Vec3& x) {
  const double s = 1.0 / (1.0 + x.squaredNorm());
  return 2.0 * s * (Mat3::Identity() + hat(x));
}

Vec3 dcay_raw_matrix_calculus(const Vec3& x, const Vec3& v) {
  const Mat3 X = hat(x);
  const Mat3 minus_inv = (Mat3::Identity() - X).inverse();
  const Mat3 plus_inv = (Mat3::Identity() + X).inverse();
  return vee(2.0 * minus_inv * hat(v) * plus_inv, 1e-8);
}

Rotation exp_so3(const Vec3& x) {
  const double th2 = x.squaredNorm();
  const Mat3 X = hat(x);
  double a, b;
  if (th2 < 1e-10) {
    a = 1.0 - th2 / 6.0;
    b = 0.5 - th2 / 24.0;
  } else {
    const double th = std::sqrt(th2);
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
  }
  return Rotation(Mat3::Identity() + a * X + b * X * X, Rotation::Unchecked{});
}

Rotation orthonormalize(const Mat3& m) {
  if (!m.allFinite() || orthogonality_error(m) > 1e-3 || m.determinant() <= 0.0) {
    throw TooFarFromGroup("orthonormalize: input is too far from SO(3)");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Rotation(svd.matrixU() * svd.matrixV().transpose(), Rotation::Unchecked{});
}

}  // namespace foldocp::liealg

namespace foldocp::liealg {

Vec3 log_so3(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double th = std::acos(c);
  if (std::numbers::pi - th < 1e-6) {
    throw OutOfChart("log_so3: rotation angle at pi");
  }
  const Vec3 w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double k = th < 1e-8 ? 0.5 + th * th / 12.0 : 0.5 * th / std::sin(th);
  return k * w;
}

Rotation retract(const Vec3& xi, Retraction r) {
  return r == Retraction::Cayley ? cay(0.5 * xi) : exp_so3(xi);
}

Vec3 retract_inv(const Rotation& g, Retraction r) {
  return r == Retraction::Cayley ? Vec3(2.0 * cay_inv(g)) : log_so3(g);
}

Mat3 dretract(const Vec3& xi, Retraction r) {
  if (r == Retraction::Cayley) return dcay_matrix(0.5 * xi);
  const double th2 = xi.squaredNorm();
  const Mat3 X = hat(xi);
  double a, b;
  if (th2 < 1e-8) {
    a = 0.5 - th2 / 24.0;
    b = 1.0 / 6.0 - th2 / 120.0;
  } else {
    const double th = std::sqrt(th2);
    a = (1.0 - std::cos(th)) / th2;
    b = (th - std::sin(th)) / (th2 * th);
  }
  return Mat3::Identity() + a * X + b * X * X;
}

Mat3 dretract_inv(const Vec3& xi, Retraction r) {
  if (r == Retraction::Cayley) return dcay_inv_matrix(0.5 * xi);
  const double th2 = xi.squaredNorm();
  const Mat3 X = hat(xi);
  double b;
  if (th2 < 1e-8) {
    b = 1.0 / 12.0 + th2 / 720.0;
  } else {
    const double th = std::sqrt(th2);
    b = (1.0 - 0.5 * th / std::tan(0.5 * th)) / th2;
  }
  return Mat3::Identity() - 0.5 * X + b * X * X;
}

}  // namespace foldocp::liealg
