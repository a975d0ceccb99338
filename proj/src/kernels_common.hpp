#pragma once

#include <vector>

#include "foldocp/kernels.hpp"

namespace foldocp::kernels::detail {

inline int segment_offset(int s) { return s * solver::kSegment; }

inline bool knot_fixed(const BoundaryConditions& bc, int k, int N) {
  return k == 0 || (k == N && bc.terminal_fixed());
}

inline void write_knot_rows(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                            const BoundaryConditions& bc, int k, const varint::KnotVec& grad,
                            Eigen::Ref<Eigen::VectorXd> out) {
  const int N = traj.grid.N;
  const double h = traj.grid.h;
  const auto& knot = traj.knots[k];
  if (knot_fixed(bc, k, N)) {
    const auto& target = k == 0 ? bc.initial : bc.terminal;
    out.segment<3>(0) = liealg::retract_inv(target.g.inverse() * knot.g, p.retraction);
    out.segment<3>(3) = knot.Pi - target.Pi;
    out(6) = knot.u - target.u;
    out.segment<4>(7) = grad.tail<4>() / h;
  } else {
    out.head<varint::kKnotDim>() = grad / h;
  }
}

inline void write_interval_rows(double h, const varint::Vec6& mult,
                                Eigen::Ref<Eigen::VectorXd> out) {
  out.head<3>() = mult.head<3>() / h;
  out.tail<3>() = mult.tail<3>();
}

}  // namespace foldocp::kernels::detail
