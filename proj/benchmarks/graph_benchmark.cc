#include <benchmark/benchmark.h>

#include "whcert/wh_graph.h"

namespace whcert {
namespace {

void BM_BuildGraph(benchmark::State& state) {
  const WhConstraint c(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    WhGraph g = WhGraph::Build(c);
    benchmark::DoNotOptimize(g.num_edges());
  }
}
BENCHMARK(BM_BuildGraph)->Args({2, 4})->Args({3, 5})->Args({3, 7})->Args({4, 10})->Args({5, 12});

void BM_LanguageCheck(benchmark::State& state) {
  const WhConstraint c(3, 7);
  const WhGraph g = WhGraph::Build(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(CheckLanguageEquivalence(g, c, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_LanguageCheck)->Arg(8)->Arg(12);

void BM_CountPaths(benchmark::State& state) {
  const WhGraph g = WhGraph::Build(WhConstraint(3, 7));
  for (auto _ : state) benchmark::DoNotOptimize(CountPaths(g, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_CountPaths)->Arg(10)->Arg(20);

}  // namespace
}  // namespace whcert
