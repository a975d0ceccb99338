#include <vector>

#include "foldocp/kernels.hpp"
#include "kernels_common.hpp"

namespace foldocp::kernels {

double fd_step(const Eigen::VectorXd& v, int i, double eps) {
  return eps * std::max(1.0, std::abs(v(i)));
}

Eigen::VectorXd residual_serial(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                const BoundaryConditions& bc) {
  const int N = traj.grid.N;
  std::vector<varint::IntervalGradient> ig(N);
  for (int k = 0; k < N; ++k) {
    ig[k] = varint::interval_gradient(p, k, traj.knots[k], traj.knots[k + 1], traj.multipliers[k]);
  }
  Eigen::VectorXd r(solver::unknown_count(N));
  for (int k = 0; k <= N; ++k) {
    varint::KnotVec g = varint::KnotVec::Zero();
    if (k > 0) g += ig[k - 1].b;
    if (k < N) g += ig[k].a;
    const int off = detail::segment_offset(k);
    detail::write_knot_rows(p, traj, bc, k, g, r.segment(off, varint::kKnotDim));
    if (k < N) {
      detail::write_interval_rows(traj.grid.h, ig[k].mult,
                                  r.segment(off + varint::kKnotDim, varint::kIntervalDim));
    }
  }
  return r;
}

Eigen::MatrixXd jacobian_dense_serial(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                      const BoundaryConditions& bc, double eps) {
  const Eigen::VectorXd v0 = solver::pack(traj);
  const int n = static_cast<int>(v0.size());
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i) {
    const double e = fd_step(v0, i, eps);
    Eigen::VectorXd v = v0;
    v(i) = v0(i) + e;
    const Eigen::VectorXd rp = residual_serial(p, solver::unpack(traj, v, p.retraction), bc);
    v(i) = v0(i) - e;
    const Eigen::VectorXd rm = residual_serial(p, solver::unpack(traj, v, p.retraction), bc);
    J.col(i) = (rp - rm) / (2 * e);
  }
  return J;
}

}  // namespace foldocp::kernels
