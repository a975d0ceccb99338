#include "foldocp/harness/euler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace foldocp::harness {

EulerAngles euler_angles(const liealg::Rotation& r) {
  const liealg::Mat3& m = r.matrix();
  const double s = std::clamp(-m(2, 0), -1.0, 1.0);
  const double pitch = std::asin(s);
  if (std::abs(pitch) >= std::numbers::pi / 2.0 - kGimbalMargin) {
    throw GimbalLock("euler_angles: pitch " + std::to_string(pitch) + " at the gimbal singularity");
  }
  return {std::atan2(m(2, 1), m(2, 2)), pitch, std::atan2(m(1, 0), m(0, 0))};
}

liealg::Rotation compose(double roll, double pitch, double yaw) {
  const Eigen::Matrix3d m = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  return liealg::orthonormalize(m);
}

liealg::Rotation compose(const EulerAngles& a) { return compose(a.roll, a.pitch, a.yaw); }

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace foldocp::harness
