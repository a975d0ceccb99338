#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "foldocp/solver.hpp"

// Residual and finite-difference Jacobian kernels. The serial versions are the
// reference; the OpenMP versions parallelize over intervals and over Jacobian
// colors and must agree with them.
namespace foldocp::kernels {

using solver::BoundaryConditions;
using varint::DiscreteProblem;
using varint::DiscreteTrajectory;

// Thread count: omp_get_max_threads(), capped by FOLDOCP_THREADS when set.
int thread_count();

Eigen::VectorXd residual_serial(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                const BoundaryConditions& bc);
Eigen::VectorXd residual_omp(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                             const BoundaryConditions& bc, int threads);

// Central differences in the chart at traj, one column at a time.
Eigen::MatrixXd jacobian_dense_serial(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                      const BoundaryConditions& bc, double eps);

// Central differences with 3 * 17 colors: columns c of the segments
// s, s + 3, s + 6, ... are perturbed together, since a segment only reaches
// the rows of its neighbours.
Eigen::SparseMatrix<double> jacobian_sparse_omp(const DiscreteProblem& p,
                                                const DiscreteTrajectory& traj,
                                                const BoundaryConditions& bc, double eps,
                                                int threads);

// Column step for unknown index i at chart origin v.
double fd_step(const Eigen::VectorXd& v, int i, double eps);

}  // namespace foldocp::kernels
