#pragma once

#include "foldocp/liealg.hpp"

namespace foldocp::harness {

// ZYX convention: R = Rz(yaw) Ry(pitch) Rx(roll).
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

inline constexpr double kGimbalMargin = 1e-6;

// Throws GimbalLock when |pitch| >= pi/2 - kGimbalMargin.
EulerAngles euler_angles(const liealg::Rotation& r);
liealg::Rotation compose(const EulerAngles& a);
liealg::Rotation compose(double roll, double pitch, double yaw);

// Angle difference wrapped to (-pi, pi].
double wrap_angle(double a);

}  // namespace foldocp::harness
