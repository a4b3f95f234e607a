#include <benchmark/benchmark.h>

#include "whcert/problem.h"
#include "whcert/simulate.h"

namespace whcert {
namespace {

const std::string kConfigDir = WHCERT_CONFIG_DIR;

void BM_FalsifyExhaustive(benchmark::State& state) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_2.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  FalsifyOptions o;
  o.horizon = static_cast<int>(state.range(0));
  o.samples = 1000;
  long long steps = 0;
  for (auto _ : state) steps += Falsify(p, *p.controller, g, o).steps;
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FalsifyExhaustive)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Rollout(benchmark::State& state) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_3.json");
  const LossWord w = LossWord::FromString("1101101110110111011011101101110110111011");
  const Eigen::Vector2d x0(3.0, 6.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Rollout(p.system, *p.controller, p.strategy, x0, w).x.back());
  }
}
BENCHMARK(BM_Rollout);

}  // namespace
}  // namespace whcert
