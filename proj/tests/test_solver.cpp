#include <gtest/gtest.h>

#include <cmath>

#include "foldocp/harness/config.hpp"
#include "foldocp/harness/diagnostics.hpp"
#include "foldocp/harness/scenario.hpp"
#include "foldocp/kernels.hpp"
#include "foldocp/solver.hpp"
#include "test_util.hpp"

using namespace foldocp;
using namespace foldocp::solver;

namespace {

harness::ScenarioConfig small_tracking(int N) {
  auto cfg = harness::default_config(harness::ScenarioKind::Tracking);
  cfg.grid.N = N;
  return cfg;
}

}  // namespace

TEST(Solver, SystemIsSquareInEveryBoundaryMode) {
  auto cfg = small_tracking(12);
  for (const auto mode :
       {BoundaryMode::FixedEndpoints, BoundaryMode::InitialCostate, BoundaryMode::FreeTerminal}) {
    cfg.boundary = mode;
    const auto p = harness::make_problem(cfg);
    const auto bc = harness::make_boundary(cfg);
    const auto t = initial_guess(p, bc);
    EXPECT_EQ(assemble_residual(p, t, bc).size(), unknown_count(12));
    EXPECT_EQ(pack(t).size(), unknown_count(12));
  }
}

TEST(Solver, PackUnpackRoundTrip) {
  const auto cfg = small_tracking(10);
  const auto p = harness::make_problem(cfg);
  const auto t = initial_guess(p, harness::make_boundary(cfg));
  const auto u = unpack(t, pack(t));
  for (int k = 0; k <= 10; ++k) {
    EXPECT_EQ(u.knots[k].g.matrix(), t.knots[k].g.matrix());
    EXPECT_EQ(u.knots[k].Pi, t.knots[k].Pi);
    EXPECT_EQ(u.knots[k].u, t.knots[k].u);
    EXPECT_EQ(u.knots[k].tau, t.knots[k].tau);
  }
  Eigen::VectorXd v = pack(t);
  v(solver::kSegment * 3) = 3.2;
  EXPECT_THROW(unpack(t, v), OutOfChart);
}

TEST(Solver, InitialGuessHonoursFixedKnots) {
  auto cfg = small_tracking(10);
  cfg.boundary = BoundaryMode::FixedEndpoints;
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  const auto t = initial_guess(p, bc);
  EXPECT_EQ(t.knots.front().g.matrix(), bc.initial.g.matrix());
  EXPECT_EQ(t.knots.back().g.matrix(), bc.terminal.g.matrix());
  EXPECT_EQ(t.knots.front().u, bc.initial.u);
}

TEST(Solver, RegularityBlockScalesLikeC1OverH) {
  const auto rows = harness::regularity_sweep(ocp::CostWeights{}, {0.04, 0.02, 0.01, 0.005});
  EXPECT_NEAR(harness::loglog_slope(rows), -1.0, 0.1);
  for (const auto& r : rows) EXPECT_NEAR(r.block / r.predicted, 1.0, 0.1);
}

TEST(Solver, NewtonConvergesQuadraticallyOnTracking) {
  const auto cfg = small_tracking(30);
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  const auto res = newton_solve(p, initial_guess(p, bc), bc, cfg.solver);
  ASSERT_TRUE(res.report.converged);
  const auto& r = res.report.residual_history;
  ASSERT_GE(r.size(), 3u);
  // last full steps: r_{k+1} <= C r_k^2 with a modest constant
  const std::size_t n = r.size();
  EXPECT_LT(r[n - 1], 1e3 * r[n - 2] * r[n - 2] + 1e-12);
  const auto kkt = varint::kkt_residuals_exact(p, res.traj);
  for (int k = 1; k < 30; ++k) EXPECT_LT(kkt.knot[k].cwiseAbs().maxCoeff() / p.grid.h, 1e-8);
}

TEST(Solver, SerialAndParallelPathsGiveTheSameSolution) {
  auto cfg = small_tracking(16);
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  cfg.solver.parallel = true;
  const auto a = newton_solve(p, initial_guess(p, bc), bc, cfg.solver);
  cfg.solver.parallel = false;
  const auto b = newton_solve(p, initial_guess(p, bc), bc, cfg.solver);
  EXPECT_EQ(a.report.iterations, b.report.iterations);
  EXPECT_EQ((pack(a.traj) - pack(b.traj)).cwiseAbs().maxCoeff(), 0.0);
  for (int k = 0; k <= 16; ++k) EXPECT_EQ(a.traj.knots[k].g.matrix(), b.traj.knots[k].g.matrix());
}

TEST(Solver, KernelsAgreeBitwise) {
  const auto cfg = small_tracking(14);
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  const auto t = initial_guess(p, bc);
  EXPECT_EQ((kernels::residual_serial(p, t, bc) - kernels::residual_omp(p, t, bc, 2))
                .cwiseAbs().maxCoeff(), 0.0);
  const Eigen::MatrixXd dense = kernels::jacobian_dense_serial(p, t, bc, 1e-6);
  const Eigen::MatrixXd sparse = Eigen::MatrixXd(kernels::jacobian_sparse_omp(p, t, bc, 1e-6, 2));
  EXPECT_EQ((dense - sparse).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solver, ZeroArmRateWeightIsSingular) {
  auto cfg = small_tracking(10);
  const auto bc = harness::make_boundary(cfg);
  auto p = harness::make_problem(cfg);
  p.weights.c1 = 0.0;
  EXPECT_THROW(newton_solve(p, initial_guess(p, bc), bc, cfg.solver), SingularError);
}

TEST(Solver, StepMapKeepsAnEquilibriumBlock) {
  auto cfg = harness::default_config(harness::ScenarioKind::Stabilization);
  cfg.initial.roll = 0.0;
  cfg.grid.N = 5;
  const auto p = harness::make_problem(cfg);
  auto t = varint::DiscreteTrajectory::zeros(p.grid);
  for (auto& k : t.knots) k.g = p.ref.g_d(0.0);
  const auto before = t;
  EXPECT_EQ(step_map(p, t, 1, cfg.solver), 0);
  EXPECT_EQ(t.knots[2].Pi, before.knots[2].Pi);
  EXPECT_EQ(t.knots[2].u, before.knots[2].u);
  EXPECT_EQ(t.multipliers[1].lambda, before.multipliers[1].lambda);
}

TEST(Solver, StepMapReproducesTheNewtonBlockFromAnExtrapolatedGuess) {
  auto cfg = small_tracking(20);
  cfg.solver.tol_residual = 1e-12;
  const auto p = harness::make_problem(cfg);
  const auto bc = harness::make_boundary(cfg);
  const auto ref = newton_solve(p, initial_guess(p, bc), bc, cfg.solver).traj;
  auto t = ref;
  auto& n = t.knots[2];
  n.Pi = 2 * t.knots[1].Pi - t.knots[0].Pi;
  n.u = 2 * t.knots[1].u - t.knots[0].u;
  n.tau = 2 * t.knots[1].tau - t.knots[0].tau;
  n.g = t.knots[1].g * t.knots[0].g.inverse() * t.knots[1].g;
  t.multipliers[1] = t.multipliers[0];
  step_map(p, t, 1, cfg.solver);
  EXPECT_LT((t.knots[2].Pi - ref.knots[2].Pi).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((t.knots[2].g.matrix() - ref.knots[2].g.matrix()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((t.multipliers[1].mu - ref.multipliers[1].mu).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Solver, ConfigValidation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tol_residual = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = SolverConfig{};
  c.backtrack = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Solver, DiagnosticsSuitePasses) {
  const auto sum = harness::run_checks("solver", 0);
  for (const auto& c : sum.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}
