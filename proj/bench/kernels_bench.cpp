// Serial reference kernels against their OpenMP versions on the tracking
// problem. Thread count follows FOLDOCP_THREADS when set.

#include <benchmark/benchmark.h>

#include "foldocp/harness/config.hpp"
#include "foldocp/harness/scenario.hpp"
#include "foldocp/kernels.hpp"

using namespace foldocp;

namespace {

struct Fixture {
  varint::DiscreteProblem p;
  solver::BoundaryConditions bc;
  varint::DiscreteTrajectory traj;
};

Fixture make(int N) {
  auto cfg = harness::default_config(harness::ScenarioKind::Tracking);
  cfg.grid.N = N;
  Fixture f{harness::make_problem(cfg), harness::make_boundary(cfg), {}};
  f.traj = solver::initial_guess(f.p, f.bc);
  return f;
}

void BM_ResidualSerial(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::residual_serial(f.p, f.traj, f.bc));
}

void BM_ResidualOmp(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)));
  const int threads = kernels::thread_count();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::residual_omp(f.p, f.traj, f.bc, threads));
  state.counters["threads"] = threads;
}

void BM_JacobianDenseSerial(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::jacobian_dense_serial(f.p, f.traj, f.bc, 1e-6));
  }
}

void BM_JacobianSparseOmp(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)));
  const int threads = kernels::thread_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::jacobian_sparse_omp(f.p, f.traj, f.bc, 1e-6, threads));
  }
  state.counters["threads"] = threads;
}

}  // namespace

BENCHMARK(BM_ResidualSerial)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ResidualOmp)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_JacobianDenseSerial)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobianSparseOmp)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
