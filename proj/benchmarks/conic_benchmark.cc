#include <benchmark/benchmark.h>

#include "whcert/cert_lmi.h"
#include "whcert/conic.h"
#include "whcert/problem.h"

namespace whcert {
namespace {

const std::string kConfigDir = WHCERT_CONFIG_DIR;

// Discrete Lyapunov LMI for a random stable n x n matrix.
void BM_LyapunovLmi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::srand(1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(n, n);
  A *= 0.9 / A.eigenvalues().cwiseAbs().maxCoeff();
  conic::ConicProblem p;
  const conic::SymMatVar P = p.AddSymmetric("P", n);
  const auto Pa = conic::AffineMatrix::Of(P);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  p.AddPsd("P >= I", Pa - conic::AffineMatrix::Constant(I));
  p.AddPsd("decrease", Pa - Pa.Congruence(A) - conic::AffineMatrix::Constant(I));
  p.AddPsd("bound", conic::AffineMatrix::Constant(1e3 * I) - Pa, false);
  for (auto _ : state) benchmark::DoNotOptimize(conic::Solve(p).margin);
}
BENCHMARK(BM_LyapunovLmi)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_VerifyRunningExample(benchmark::State& state) {
  const Problem p = LoadProblem(kConfigDir + "/case_study_1.json");
  const WhGraph g = WhGraph::Build(p.constraint);
  const GbfVariant v{static_cast<GbfTag>(state.range(0)), p.strategy};
  for (auto _ : state) benchmark::DoNotOptimize(Verify(v, p, p.controller->K(), g).status);
  state.SetLabel(v.ToString());
}
BENCHMARK(BM_VerifyRunningExample)
    ->Arg(static_cast<int>(GbfTag::kGbf))
    ->Arg(static_cast<int>(GbfTag::kDGbf))
    ->Arg(static_cast<int>(GbfTag::kOneDGbf))
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace whcert
