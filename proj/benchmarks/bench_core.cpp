#include <benchmark/benchmark.h>

#include "vortexlab/solver.hpp"
#include "vortexlab/stability.hpp"

using namespace vortexlab;

namespace {

Configuration torus_config(int n) {
  const MeshPtr mesh = build_torus_mesh(n, n, 2.0 * M_PI, 2.0 * M_PI);
  return random_configuration(mesh, 1, 0.5, 7);
}

void BM_Energy(benchmark::State& state) {
  const Configuration config = torus_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(energy(config).total);
}
BENCHMARK(BM_Energy)->Arg(32)->Arg(64)->Arg(128);

void BM_Gradient(benchmark::State& state) {
  const Configuration config = torus_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gradient(config));
}
BENCHMARK(BM_Gradient)->Arg(32)->Arg(64)->Arg(128);

void BM_HessianApply(benchmark::State& state) {
  const Configuration config = torus_config(static_cast<int>(state.range(0)));
  const Variation dir = gradient(config);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_apply(config, dir));
}
BENCHMARK(BM_HessianApply)->Arg(32)->Arg(64)->Arg(128);

void BM_Diagnostics(benchmark::State& state) {
  const Configuration config = torus_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(diagnostics(config));
}
BENCHMARK(BM_Diagnostics)->Arg(32)->Arg(64);

void BM_CoulombFix(benchmark::State& state) {
  const Configuration config = torus_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(coulomb_gauge_fix(config));
}
BENCHMARK(BM_CoulombFix)->Arg(32)->Arg(64);

void BM_MinimizeSmall(benchmark::State& state) {
  const MeshPtr mesh = build_torus_mesh(16, 16, 2.0 * M_PI, 2.0 * M_PI);
  SolveOptions opts;
  opts.grad_tolerance = 1e-4;
  for (auto _ : state) {
    const Configuration initial = random_configuration(mesh, 1, 0.5, 7);
    benchmark::DoNotOptimize(minimize(initial, opts).iterations);
  }
}
BENCHMARK(BM_MinimizeSmall)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
