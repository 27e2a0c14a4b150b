#include <benchmark/benchmark.h>

#include <map>

#include "dgue/edges.hpp"
#include "dgue/kernels.hpp"
#include "dgue/rmt.hpp"

namespace {

const dgue::DeformationModel& model(int n) {
  static std::map<int, dgue::DeformationModel> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, dgue::DeformationModel(dgue::DiscreteMeasure({{-1.5, 0.5}, {1.5, 0.5}}), {}, n)).first;
  }
  return it->second;
}

void BM_EdgeExperiment(benchmark::State& state, dgue::Execution exec) {
  const auto& m = model(static_cast<int>(state.range(0)));
  const auto edge = dgue::analyze_edges(m).back();
  const auto trials = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto r = dgue::run_edge_experiment(m, edge, 1, trials, 7, 0.05, exec);
    benchmark::DoNotOptimize(r.ks);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_EdgeSerial(benchmark::State& state) { BM_EdgeExperiment(state, dgue::Execution::kSerial); }
void BM_EdgeParallel(benchmark::State& state) { BM_EdgeExperiment(state, dgue::Execution::kParallel); }

void BM_Eigensolver(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> a(n, 0.0);
  const auto h = dgue::sample_matrix(a, 1, 0);
  for (auto _ : state) {
    auto copy = h;
    benchmark::DoNotOptimize(dgue::hermitian_eigenvalues_inplace(copy));
  }
}

void BM_PearceyIntensity(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dgue::pearcey_intensity(2.0, 1.5));
}

}  // namespace

BENCHMARK(BM_EdgeSerial)->Args({100, 64})->Args({300, 32})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EdgeParallel)->Args({100, 64})->Args({300, 32})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Eigensolver)->Arg(100)->Arg(300)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PearceyIntensity)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
