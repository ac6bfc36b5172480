// Microbenchmarks for the hot paths: projection, sphere sampling, the
// two-point estimator's inner solves, one full gradient-tracking epoch, and
// the mixing-deviation power iteration.

#include <benchmark/benchmark.h>

#include "dzgt/driver.hpp"
#include "dzgt/harness.hpp"

namespace {

using namespace dzgt;

SmpecInstance quiet_benchmark(int m) {
  return builtin_benchmark(m, NoiseModel::normal(1.0, 0.1), NoiseModel::normal(1.0, 0.1));
}

void BM_PolygonProjection(benchmark::State& state) {
  const SmpecInstance inst = quiet_benchmark(1);
  const Vector x = Vector::Zero(2);
  Vector u(2);
  u << 0.0, 1.0;  // infeasible: exercises the facet/vertex enumeration
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.feasible_set.project(x, u));
  }
}
BENCHMARK(BM_PolygonProjection);

void BM_SphereSample(benchmark::State& state) {
  Rng rng(42);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_sphere(n, 0.1, rng));
  }
}
BENCHMARK(BM_SphereSample)->Arg(2)->Arg(16);

void BM_InnerSolve(benchmark::State& state) {
  const SmpecInstance inst = quiet_benchmark(1);
  const InnerConfig cfg;
  const Vector x = Vector::Zero(2);
  const Vector z0 = Vector::Zero(2);
  const long k = state.range(0);
  std::uint64_t counter = 0;
  for (auto _ : state) {
    Rng rng(++counter);
    benchmark::DoNotOptimize(solve_inner(inst, x, k, cfg, z0, rng));
  }
}
BENCHMARK(BM_InnerSolve)->Arg(0)->Arg(99)->Arg(9999);

void BM_GtEpoch(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const SmpecInstance inst = quiet_benchmark(m);
  const MixingMatrix mix = build_mixing(Topology::kComplete, m);
  RunConfig cfg;
  cfg.gamma = 1e-5;
  cfg.eval.cadence = 0;
  SwarmState st = init_swarm(inst, mix, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(st, inst, mix, cfg));
  }
}
BENCHMARK(BM_GtEpoch)->Arg(10)->Arg(100);

void BM_DeviationNorm(benchmark::State& state) {
  const MixingMatrix mix = build_mixing(Topology::kRing, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(deviation_norm_power(mix.W));
  }
}
BENCHMARK(BM_DeviationNorm)->Arg(20)->Arg(100);

void BM_ObjectiveEvaluation(benchmark::State& state) {
  const SmpecInstance inst = quiet_benchmark(5);
  EvalSettings eval;
  eval.samples = 200;
  const InnerConfig inner;
  const Vector x = Vector::Zero(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_objective(inst, x, eval, inner, 7, 0));
  }
}
BENCHMARK(BM_ObjectiveEvaluation);

}  // namespace

BENCHMARK_MAIN();
