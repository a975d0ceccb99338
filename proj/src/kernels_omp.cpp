#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <omp.h>

#include "foldocp/kernels.hpp"
#include "kernels_common.hpp"

namespace foldocp::kernels {

int thread_count() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("FOLDOCP_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) n = std::min(n, cap);
    } catch (const std::exception&) {
      throw ValidationError("FOLDOCP_THREADS must be a positive integer");
    }
  }
  return std::max(n, 1);
}

namespace {

// Exceptions may not leave an OpenMP region; the first one is kept and
// rethrown by the caller.
class FirstError {
 public:
  void capture() {
#pragma omp critical(foldocp_first_error)
    if (!ptr_) ptr_ = std::current_exception();
  }
  void rethrow() const {
    if (ptr_) std::rethrow_exception(ptr_);
  }

 private:
  std::exception_ptr ptr_;
};

}  // namespace

Eigen::VectorXd residual_omp(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                             const BoundaryConditions& bc, int threads) {
  const int N = traj.grid.N;
  std::vector<varint::IntervalGradient> ig(N);
  Eigen::VectorXd r(solver::unknown_count(N));
  FirstError err;
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < N; ++k) {
    try {
      ig[k] = varint::interval_gradient(p, k, traj.knots[k], traj.knots[k + 1],
                                        traj.multipliers[k]);
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow();
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k <= N; ++k) {
    try {
      varint::KnotVec g = varint::KnotVec::Zero();
      if (k > 0) g += ig[k - 1].b;
      if (k < N) g += ig[k].a;
      const int off = detail::segment_offset(k);
      detail::write_knot_rows(p, traj, bc, k, g, r.segment(off, varint::kKnotDim));
      if (k < N) {
        detail::write_interval_rows(traj.grid.h, ig[k].mult,
                                    r.segment(off + varint::kKnotDim, varint::kIntervalDim));
      }
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow();
  return r;
}

Eigen::SparseMatrix<double> jacobian_sparse_omp(const DiscreteProblem& p,
                                                const DiscreteTrajectory& traj,
                                                const BoundaryConditions& bc, double eps,
                                                int threads) {
  using Triplet = Eigen::Triplet<double>;
  const int N = traj.grid.N;
  const int S = solver::kSegment;
  const int K = varint::kKnotDim;
  const Eigen::VectorXd v0 = solver::pack(traj);
  const int n = static_cast<int>(v0.size());
  constexpr int kGroups = 3;
  const int colors = kGroups * S;
  std::vector<std::vector<Triplet>> parts(colors);
  FirstError err;

#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (int color = 0; color < colors; ++color) {
    const int group = color / S;
    const int c = color % S;
    std::vector<int> cols;
    for (int s = group; s <= N; s += kGroups) {
      if (s == N && c >= K) continue;
      cols.push_back(s * S + c);
    }
    if (cols.empty()) continue;
    try {
      Eigen::VectorXd vp = v0, vm = v0;
      for (int i : cols) {
        const double e = fd_step(v0, i, eps);
        vp(i) += e;
        vm(i) -= e;
      }
      const Eigen::VectorXd rp = residual_serial(p, solver::unpack(traj, vp, p.retraction), bc);
      const Eigen::VectorXd rm = residual_serial(p, solver::unpack(traj, vm, p.retraction), bc);
      auto& out = parts[color];
      for (int i : cols) {
        const int s = i / S;
        const double e = fd_step(v0, i, eps);
        // knots s-1..s+1 and intervals s-1..s
        const int row_lo = std::max(0, (s - 1) * S);
        const int row_hi = std::min(n, (s + 1) * S + K);
        for (int row = row_lo; row < row_hi; ++row) {
          const double d = (rp(row) - rm(row)) / (2 * e);
          if (d != 0.0) out.emplace_back(row, i, d);
        }
      }
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow();

  std::vector<Triplet> all;
  for (const auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(all.begin(), all.end());
  return J;
}

}  // namespace foldocp::kernels
