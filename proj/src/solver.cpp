#include "foldocp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "foldocp/kernels.hpp"

namespace foldocp::solver {

using varint::KnotVec;
using varint::kKnotDim;

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0) || !(tol_step > 0.0) || !(fd_epsilon > 0.0)) {
    throw ValidationError("solver tolerances must be > 0");
  }
  if (max_iter < 1) throw ValidationError("solver.max_iter must be >= 1");
  if (!(armijo_c > 0.0 && armijo_c < 0.5) || !(backtrack > 0.0 && backtrack < 1.0) ||
      !(min_step > 0.0)) {
    throw ValidationError("solver line-search parameters out of range");
  }
}

int unknown_count(int N) { return kSegment * N + kKnotDim; }

Eigen::VectorXd pack(const DiscreteTrajectory& traj) {
  const int N = traj.grid.N;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(unknown_count(N));
  for (int k = 0; k <= N; ++k) {
    const int off = k * kSegment;
    const auto& kn = traj.knots[k];
    v.segment<3>(off + 3) = kn.Pi;
    v(off + 6) = kn.u;
    v.segment<4>(off + 7) = kn.tau;
    if (k < N) {
      v.segment<3>(off + kKnotDim) = traj.multipliers[k].lambda;
      v.segment<3>(off + kKnotDim + 3) = traj.multipliers[k].mu;
    }
  }
  return v;
}

DiscreteTrajectory unpack(const DiscreteTrajectory& base, const Eigen::VectorXd& v,
                          liealg::Retraction r) {
  const int N = base.grid.N;
  if (v.size() != unknown_count(N)) throw ValidationError("unpack: vector length mismatch");
  DiscreteTrajectory out = base;
  for (int k = 0; k <= N; ++k) {
    const int off = k * kSegment;
    auto& kn = out.knots[k];
    const Vec3 d = v.segment<3>(off);
    if (!(d.norm() < std::numbers::pi - 1e-3)) {
      throw OutOfChart("unpack: attitude increment leaves the chart");
    }
    if (!d.isZero(0.0)) kn.g = base.knots[k].g * liealg::retract(d, r);
    kn.Pi = v.segment<3>(off + 3);
    kn.u = v(off + 6);
    kn.tau = v.segment<4>(off + 7);
    if (k < N) {
      out.multipliers[k].lambda = v.segment<3>(off + kKnotDim);
      out.multipliers[k].mu = v.segment<3>(off + kKnotDim + 3);
    }
  }
  return out;
}

Eigen::VectorXd assemble_residual(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                                  const BoundaryConditions& bc) {
  return kernels::residual_omp(p, traj, bc, kernels::thread_count());
}

std::pair<double, double> regularity_check(const DiscreteProblem& p,
                                           const DiscreteTrajectory& traj, int k) {
  return {std::abs(varint::regularity_block(p, traj, k)), p.weights.c1 / traj.grid.h};
}

DiscreteTrajectory initial_guess(const DiscreteProblem& p, const BoundaryConditions& bc) {
  const auto& grid = p.grid;
  DiscreteTrajectory traj = DiscreteTrajectory::zeros(grid);
  const int N = grid.N;
  const liealg::Rotation g0 = bc.initial.g;
  const liealg::Rotation gT = bc.terminal_fixed() ? bc.terminal.g : p.ref.g_d(grid.T());
  const Vec3 xi = liealg::retract_inv(g0.inverse() * gT, p.retraction);
  for (int k = 0; k <= N; ++k) {
    auto& kn = traj.knots[k];
    const double s = static_cast<double>(k) / N;
    kn.g = g0 * liealg::retract(s * xi, p.retraction);
    kn.Pi = p.ref.Pi_d(grid.t(k));
    kn.u = plant::kNominalArmAngle;
    kn.tau.setZero();
  }
  traj.knots[0].g = bc.initial.g;
  traj.knots[0].Pi = bc.initial.Pi;
  traj.knots[0].u = bc.initial.u;
  if (bc.terminal_fixed()) {
    traj.knots[N].g = bc.terminal.g;
    traj.knots[N].Pi = bc.terminal.Pi;
    traj.knots[N].u = bc.terminal.u;
  }
  return traj;
}

namespace {

void require_regular(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k) {
  if (regularity_check(p, traj, k).first < 1e-12) {
    throw SingularError("singular Jacobian: regularity block d2L/du_k du_k+1 vanishes (c1 = 0)");
  }
}

Eigen::VectorXd residual(const DiscreteProblem& p, const DiscreteTrajectory& traj,
                         const BoundaryConditions& bc, const SolverConfig& cfg, int threads) {
  return cfg.parallel ? kernels::residual_omp(p, traj, bc, threads)
                      : kernels::residual_serial(p, traj, bc);
}

}  // namespace

SolveResult newton_solve(const DiscreteProblem& p, const DiscreteTrajectory& traj0,
                         const BoundaryConditions& bc, const SolverConfig& cfg) {
  cfg.validate();
  traj0.validate();
  require_regular(p, traj0, 0);
  const int threads = kernels::thread_count();

  SolveResult res;
  res.traj = traj0;
  auto& rep = res.report;
  Eigen::VectorXd r = residual(p, res.traj, bc, cfg, threads);
  if (!r.allFinite()) throw NonFinite("newton_solve: residual at the initial guess is not finite");

  for (int it = 0;; ++it) {
    const double rn = r.cwiseAbs().maxCoeff();
    rep.residual_history.push_back(rn);
    rep.iterations = it;
    rep.final_residual = rn;
    if (rn <= cfg.tol_residual) {
      rep.converged = true;
      break;
    }
    if (it == cfg.max_iter) break;

    Eigen::SparseMatrix<double> J;
    if (cfg.parallel) {
      J = kernels::jacobian_sparse_omp(p, res.traj, bc, cfg.fd_epsilon, threads);
    } else {
      J = kernels::jacobian_dense_serial(p, res.traj, bc, cfg.fd_epsilon).sparseView();
    }
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      throw SingularError("singular Jacobian: sparse LU factorization failed");
    }
    const Eigen::VectorXd step = lu.solve(-r);
    if (lu.info() != Eigen::Success || !step.allFinite()) {
      throw SingularError("singular Jacobian: Newton step is not finite");
    }

    {
      // |J|_1 |J^{-1} x|_1 / |x|_1 over two fixed probes
      double jnorm = 0.0;
      for (int c = 0; c < J.outerSize(); ++c) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator e(J, c); e; ++e) s += std::abs(e.value());
        jnorm = std::max(jnorm, s);
      }
      const int n = static_cast<int>(r.size());
      Eigen::VectorXd x1 = Eigen::VectorXd::Ones(n);
      Eigen::VectorXd x2(n);
      for (int i = 0; i < n; ++i) x2(i) = (i % 2 == 0) ? 1.0 : -1.0;
      const double inv = std::max(lu.solve(x1).lpNorm<1>(), lu.solve(x2).lpNorm<1>()) / n;
      rep.condition_estimate = jnorm * inv;
    }

    const Eigen::VectorXd v0 = pack(res.traj);
    const double phi0 = 0.5 * r.squaredNorm();
    double t = 1.0;
    DiscreteTrajectory trial;
    Eigen::VectorXd rt;
    while (true) {
      bool ok = true;
      try {
        trial = unpack(res.traj, v0 + t * step, p.retraction);
        rt = residual(p, trial, bc, cfg, threads);
        ok = rt.allFinite();
      } catch (const OutOfChart&) {
        ok = false;
      } catch (const NonFinite&) {
        ok = false;
      }
      if (ok && 0.5 * rt.squaredNorm() <= (1.0 - 2.0 * cfg.armijo_c * t) * phi0) break;
      t *= cfg.backtrack;
      if (t < cfg.min_step) {
        throw NoConvergence("newton_solve: line search stalled at residual " + std::to_string(rn));
      }
    }
    res.traj = std::move(trial);
    r = std::move(rt);
    if (t * step.cwiseAbs().maxCoeff() < cfg.tol_step) {
      const double rn2 = r.cwiseAbs().maxCoeff();
      rep.residual_history.push_back(rn2);
      rep.iterations = it + 1;
      rep.final_residual = rn2;
      rep.converged = rn2 <= cfg.tol_residual;
      break;
    }
  }
  if (!rep.converged) {
    throw NoConvergence("newton_solve: residual " + std::to_string(rep.final_residual) +
                        " after " + std::to_string(rep.iterations) + " iterations");
  }
  return res;
}

// ---------------------------------------------------------------------------

namespace {

using Vec17 = Eigen::Matrix<double, kSegment, 1>;
using Mat17 = Eigen::Matrix<double, kSegment, kSegment>;

struct Block {
  DiscreteKnot next;
  varint::Multipliers mult;
};

Block apply(const Block& base, const Vec17& z, liealg::Retraction r) {
  Block b = base;
  if (!z.head<3>().isZero(0.0)) b.next.g = base.next.g * liealg::retract(z.head<3>(), r);
  b.next.Pi += z.segment<3>(3);
  b.next.u += z(6);
  b.next.tau += z.segment<4>(7);
  b.mult.lambda += z.segment<3>(11);
  b.mult.mu += z.segment<3>(14);
  return b;
}

Vec17 step_equations(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k,
                     const Block& b) {
  const double h = p.grid.h;
  const auto& prev = traj.knots[k - 1];
  const auto& cur = traj.knots[k];
  const KnotVec g =
      (varint::interval_gradient(p, k - 1, prev, cur, traj.multipliers[k - 1]).b +
       varint::interval_gradient(p, k, cur, b.next, b.mult).a) / h;
  Vec17 e;
  e.head<7>() = g.head<7>();
  e.segment<3>(7) = plant::torque_map(p.plant.actuation, cur.u) * g.tail<4>();
  e(10) = 0.5 * b.next.tau.sum();
  e.segment<3>(11) = varint::residual_phi123(p.plant, h, cur, b.next);
  e.segment<3>(14) = varint::residual_phi4(p.plant, h, cur, b.next, p.retraction);
  return e;
}

// Damped Newton on a square subset of the block equations, the other unknowns
// held. Predictor only: returns the best iterate without throwing.
Block partial_newton(const DiscreteProblem& p, const DiscreteTrajectory& traj, int k, Block b,
                     const std::vector<int>& rows, const std::vector<int>& cols,
                     const SolverConfig& cfg, double max_step = 1e300) {
  const int n = static_cast<int>(rows.size());
  auto sub = [&](const Vec17& e) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = e(rows[i]);
    return r;
  };
  Eigen::VectorXd e = sub(step_equations(p, traj, k, b));
  for (int it = 0; it < cfg.max_iter && e.cwiseAbs().maxCoeff() > cfg.tol_residual; ++it) {
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
      Vec17 z = Vec17::Zero();
      z(cols[j]) = cfg.fd_epsilon;
      const Eigen::VectorXd ep = sub(step_equations(p, traj, k, apply(b, z, p.retraction)));
      z(cols[j]) = -cfg.fd_epsilon;
      const Eigen::VectorXd em = sub(step_equations(p, traj, k, apply(b, z, p.retraction)));
      J.col(j) = (ep - em) / (2 * cfg.fd_epsilon);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) break;
    const Eigen::VectorXd dz = lu.solve(-e);
    double t = std::min(1.0, max_step / std::max(dz.cwiseAbs().maxCoeff(), 1e-300));
    bool accepted = false;
    while (t >= cfg.min_step) {
      Vec17 z = Vec17::Zero();
      for (int j = 0; j < n; ++j) z(cols[j]) = t * dz(j);
      const Block trial = apply(b, z, p.retraction);
      const Eigen::VectorXd et = sub(step_equations(p, traj, k, trial));
      if (et.allFinite() && et.squaredNorm() <= (1.0 - 2.0 * cfg.armijo_c * t) * e.squaredNorm()) {
        b = trial;
        e = et;
        accepted = true;
        break;
      }
      t *= cfg.backtrack;
    }
    if (!accepted) break;
  }
  return b;
}

}  // namespace

int step_map(const DiscreteProblem& p, DiscreteTrajectory& traj, int k, const SolverConfig& cfg) {
  const int N = traj.grid.N;
  if (k < 1 || k > N - 1) throw ValidationError("step_map: k must lie in 1..N-1");
  require_regular(p, traj, k - 1);
  Block b{traj.knots[k + 1], traj.multipliers[k]};
  const auto& cur = traj.knots[k];
  // The knot-k rows are block triangular: (u, lambda, mu) first, then the
  // attitude increment, then Pi and tau through the constraints. The attitude
  // rows only see the increment along mu at second order, so a coupled Newton
  // from a rough guess can drift to a distant root.
  b = partial_newton(p, traj, k, b, {3, 4, 5, 6, 7, 8, 9}, {6, 11, 12, 13, 14, 15, 16}, cfg);
  const double y0 = liealg::retract_inv(cur.g.inverse() * b.next.g, p.retraction).norm();
  b = partial_newton(p, traj, k, b, {0, 1, 2}, {0, 1, 2}, cfg, 0.1 * std::max(y0, 1e-6));
  b = partial_newton(p, traj, k, b, {10, 11, 12, 13, 14, 15, 16}, {3, 4, 5, 7, 8, 9, 10}, cfg);
  Vec17 e = step_equations(p, traj, k, b);
  int it = 0;
  for (; e.cwiseAbs().maxCoeff() > cfg.tol_residual; ++it) {
    if (it == cfg.max_iter) {
      throw NoConvergence("step_map: block Newton did not converge at k = " + std::to_string(k));
    }
    Mat17 J;
    for (int j = 0; j < kSegment; ++j) {
      const double eps = cfg.fd_epsilon;
      Vec17 z = Vec17::Zero();
      z(j) = eps;
      const Vec17 ep = step_equations(p, traj, k, apply(b, z, p.retraction));
      z(j) = -eps;
      const Vec17 em = step_equations(p, traj, k, apply(b, z, p.retraction));
      J.col(j) = (ep - em) / (2 * eps);
    }
    Eigen::FullPivLU<Mat17> lu(J);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300) {
      throw SingularError("singular block at k = " + std::to_string(k));
    }
    const Vec17 z = lu.solve(-e);
    double t = 1.0;
    Block trial;
    Vec17 et;
    while (true) {
      trial = apply(b, t * z, p.retraction);
      et = step_equations(p, traj, k, trial);
      if (et.allFinite() && et.squaredNorm() <= (1.0 - 2.0 * cfg.armijo_c * t) * e.squaredNorm()) {
        break;
      }
      t *= cfg.backtrack;
      if (t < cfg.min_step) {
        throw NoConvergence("step_map: line search stalled at k = " + std::to_string(k));
      }
    }
    b = trial;
    e = et;
    if (t * z.cwiseAbs().maxCoeff() < 1e-15) break;
  }
  if (e.cwiseAbs().maxCoeff() > cfg.tol_residual) {
    throw NoConvergence("step_map: block residual stagnated at k = " + std::to_string(k));
  }
  traj.knots[k + 1] = b.next;
  traj.multipliers[k] = b.mult;
  return it;
}

DiscreteTrajectory march(const DiscreteProblem& p, const DiscreteTrajectory& start,
                         const SolverConfig& cfg) {
  DiscreteTrajectory traj = start;
  const int N = traj.grid.N;
  for (int k = 1; k < N; ++k) {
    const auto& a = traj.knots[k - 1];
    const auto& c = traj.knots[k];
    auto& next = traj.knots[k + 1];
    next.g = c.g * liealg::retract(liealg::retract_inv(a.g.inverse() * c.g, p.retraction),
                                   p.retraction);
    next.Pi = 2 * c.Pi - a.Pi;
    next.u = 2 * c.u - a.u;
    next.tau = 2 * c.tau - a.tau;
    traj.multipliers[k] = traj.multipliers[k - 1];
    step_map(p, traj, k, cfg);
  }
  return traj;
}

// ---------------------------------------------------------------------------

std::vector<ocp::OCPState> shooting_extremal(const DiscreteProblem& p,
                                             const BoundaryConditions& bc, int substeps) {
  if (substeps < 1) throw ValidationError("shooting_extremal: substeps must be >= 1");
  const auto& grid = p.grid;
  ocp::OCPState s;
  s.g = bc.initial.g;
  s.Pi = bc.initial.Pi;
  s.u = bc.initial.u;
  s.u_dot = bc.u_dot0;
  s.p_Pi = bc.p_Pi0;
  s.p_xi = bc.p_xi0;
  const double dt = grid.h / substeps;
  std::vector<ocp::OCPState> out;
  out.reserve(grid.N + 1);
  out.push_back(s);
  for (int k = 0; k < grid.N; ++k) {
    for (int j = 0; j < substeps; ++j) {
      s = ocp::rk4_extremal_step(p.weights, p.plant, p.ref, grid.t(k) + j * dt, s, dt);
    }
    out.push_back(s);
  }
  return out;
}

std::pair<BoundaryConditions, DiscreteTrajectory> shooting_matched(
    const DiscreteProblem& p, const std::vector<ocp::OCPState>& ext) {
  const int N = p.grid.N;
  if (static_cast<int>(ext.size()) != N + 1) {
    throw ValidationError("shooting_matched: extremal length does not match the grid");
  }
  DiscreteTrajectory traj = DiscreteTrajectory::zeros(p.grid);
  for (int k = 0; k <= N; ++k) {
    auto& kn = traj.knots[k];
    kn.g = ext[k].g;
    kn.Pi = ext[k].Pi;
    kn.u = ext[k].u;
    kn.tau = ocp::tau_star(p.weights, p.plant.actuation, ext[k].p_Pi, ext[k].u);
    if (k < N) {
      traj.multipliers[k].lambda = 0.5 * (ext[k].p_Pi + ext[k + 1].p_Pi);
      traj.multipliers[k].mu = 0.5 * (ext[k].p_xi + ext[k + 1].p_xi);
    }
  }
  BoundaryConditions bc;
  bc.mode = BoundaryMode::FixedEndpoints;
  bc.initial = traj.knots.front();
  bc.terminal = traj.knots.back();
  return {bc, traj};
}

SolveResult solve(const DiscreteProblem& p, const BoundaryConditions& bc,
                  const SolverConfig& cfg) {
  if (bc.mode == BoundaryMode::InitialCostate || cfg.mode == SolveMode::Shooting) {
    const auto ext = shooting_extremal(p, bc);
    const auto [fixed, guess] = shooting_matched(p, ext);
    return newton_solve(p, guess, fixed, cfg);
  }
  SolveResult res = newton_solve(p, initial_guess(p, bc), bc, cfg);
  if (cfg.mode == SolveMode::Marching) res.traj = march(p, res.traj, cfg);
  return res;
}

}  // namespace foldocp::solver
