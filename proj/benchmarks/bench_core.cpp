#include <benchmark/benchmark.h>

#include <random>

#include <pmor/analysis.hpp>
#include <pmor/error_bound.hpp>
#include <pmor/heat_rod.hpp>
#include <pmor/krylov.hpp>
#include <pmor/numerics.hpp>

using namespace pmor;

static ExpansionGrid grid() {
  ExpansionGrid g;
  g.S = {Complex(0.0, 0.0), Complex(1.0, 1.0)};
  g.P = {{200.0}, {500.0}, {900.0}};
  return g;
}

static void BM_LUSolve(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  CMatrix K(n, n);
  for (Eigen::Index i = 0; i < K.size(); ++i) K.data()[i] = {g(rng), g(rng)};
  K += CMatrix::Identity(n, n) * double(n);
  const CMatrix rhs = CMatrix::Ones(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(lu_solve(K, rhs));
}
BENCHMARK(BM_LUSolve)->Arg(100)->Arg(200)->Arg(400);

static void BM_Orthonormalize(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  RMatrix cols(400, state.range(0));
  for (Eigen::Index i = 0; i < cols.size(); ++i) cols.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(orthonormalize(cols));
}
BENCHMARK(BM_Orthonormalize)->Arg(12)->Arg(48);

static void BM_ReduceHeatRod(benchmark::State& state) {
  const auto sys = generate_heat_rod(HeatRodSpec::with_nodes(static_cast<int>(state.range(0))));
  const auto g = grid();
  for (auto _ : state) benchmark::DoNotOptimize(reduce(sys, g, ReductionPlan{}));
}
BENCHMARK(BM_ReduceHeatRod)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_BaselineHeatRod(benchmark::State& state) {
  const auto sys = generate_heat_rod(HeatRodSpec{});
  const auto g = grid();
  ReductionPlan plan;
  plan.sided = Sided::One;
  for (auto _ : state) benchmark::DoNotOptimize(reduce_combined_baseline(sys, g, plan, 12));
}
BENCHMARK(BM_BaselineHeatRod)->Unit(benchmark::kMillisecond);

static void BM_DerivativeTensors(benchmark::State& state) {
  const auto sys = generate_heat_rod(HeatRodSpec::with_nodes(50));
  for (auto _ : state) {
    benchmark::DoNotOptimize(derivative_tensors(sys, 1.0, {500.0}, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_DerivativeTensors)->Arg(3)->Arg(6);

static void BM_SimulateReduced(benchmark::State& state) {
  const auto sys = generate_heat_rod(HeatRodSpec{});
  const auto red = reduce(sys, grid(), ReductionPlan{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(red.reduced.system, {500.0}, InputSpec::step(), 10.0, 1e-3));
  }
}
BENCHMARK(BM_SimulateReduced)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
