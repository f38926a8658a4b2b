#include <benchmark/benchmark.h>

#include <random>

#include "finsler/graph.hpp"

using namespace finsler;

namespace {

DataMatrix blob(Index n, Index dims) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  RowMatrix m(n, dims);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return DataMatrix(std::move(m));
}

}  // namespace

static void BM_KnnExact(benchmark::State& state) {
  const auto data = blob(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(knn_exact(data, 15));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnExact)->RangeMultiplier(2)->Range(500, 4000)->Complexity(benchmark::oNSquared)->Unit(benchmark::kMillisecond);

static void BM_KnnDescent(benchmark::State& state) {
  const auto data = blob(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(knn_descent(data, 15));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnDescent)->RangeMultiplier(2)->Range(500, 4000)->Unit(benchmark::kMillisecond);

static void BM_GeodesicFull(benchmark::State& state) {
  const auto g = knn_exact(blob(state.range(0), 3), 15);
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_full(g));
}
BENCHMARK(BM_GeodesicFull)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
