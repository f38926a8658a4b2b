#include <benchmark/benchmark.h>

#include <random>

#include "finsler/mds.hpp"
#include "finsler/tsne.hpp"
#include "finsler/umap.hpp"

using namespace finsler;

namespace {

RowMatrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RowMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Dissimilarities dense_joint(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) {
        rows[static_cast<std::size_t>(i)].push_back({j, unif(rng)});
        total += rows[static_cast<std::size_t>(i)].back().value;
      }
  for (auto& r : rows)
    for (auto& e : r) e.value /= total;
  return Dissimilarities(std::move(rows), Normalization::None, Symmetry::Asymmetric);
}

}  // namespace

static void BM_TsneGradFixed(benchmark::State& state) {
  const Index n = state.range(0);
  const auto p = dense_joint(n, 1);
  const RowMatrix y = gaussian(n, 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tsne_grad_fixed(p, y, 1.0));
  state.SetComplexityN(n);
}
BENCHMARK(BM_TsneGradFixed)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

static void BM_FinslerTsneGrad(benchmark::State& state) {
  const Index n = state.range(0);
  const auto p = dense_joint(n, 1);
  const Embedding e(gaussian(n, 3, 2), RandersSpace::along_last_axis(3, 0.1));
  for (auto _ : state) benchmark::DoNotOptimize(finsler_tsne_grad(p, e, 2.0));
  state.SetComplexityN(n);
}
BENCHMARK(BM_FinslerTsneGrad)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

static void BM_FinslerUmapPair(benchmark::State& state) {
  const RowMatrix y = gaussian(2, 3, 3);
  const auto space = RandersSpace::along_last_axis(3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(finsler_umap_grads(row_span(y, 0), row_span(y, 1), space, 1.577, 0.895));
}
BENCHMARK(BM_FinslerUmapPair);

static void BM_FinslerStressGrad(benchmark::State& state) {
  const Index n = state.range(0);
  RowMatrix d = gaussian(n, n, 4).cwiseAbs();
  d.diagonal().setZero();
  const StressProblem problem(d, RandersSpace::along_last_axis(3, 0.5));
  const RowMatrix y = gaussian(n, 3, 5);
  for (auto _ : state) benchmark::DoNotOptimize(finsler_stress_grad(y, problem));
  state.SetComplexityN(n);
}
BENCHMARK(BM_FinslerStressGrad)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

static void BM_FinslerSmacofStep(benchmark::State& state) {
  const Index n = state.range(0);
  RowMatrix d = gaussian(n, n, 6).cwiseAbs();
  d.diagonal().setZero();
  const StressProblem problem(d, RandersSpace::along_last_axis(3, 0.5));
  const RowMatrix y = gaussian(n, 3, 7);
  for (auto _ : state) benchmark::DoNotOptimize(finsler_smacof_step(y, problem));
}
BENCHMARK(BM_FinslerSmacofStep)->Arg(100)->Arg(300);
