#include <benchmark/benchmark.h>

#include "nilflow/analysis.hpp"
#include "nilflow/birkhoff.hpp"
#include "nilflow/line_model.hpp"
#include "nilflow/timechange.hpp"

using namespace nilflow;

namespace {

WeylSumSpec golden_spec(std::int64_t J) {
  WeylSumSpec s;
  s.label = {1, 1};
  s.ssp = return_params(golden_frame());
  s.y = 0.1;
  s.z = 0.37;
  s.J = J;
  return s;
}

void BM_WeylSum(benchmark::State& st) {
  set_threads(static_cast<int>(st.range(1)));
  const WeylSumSpec s = golden_spec(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(weyl_sum(s));
  st.SetItemsProcessed(st.iterations() * s.J);
  set_threads(0);
}
BENCHMARK(BM_WeylSum)->Args({1 << 20, 1})->Args({1 << 24, 1})->Args({1 << 24, 8})->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_WeylSumDirect(benchmark::State& st) {
  const WeylSumSpec s = golden_spec(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(weyl_sum_direct(s));
  st.SetItemsProcessed(st.iterations() * s.J);
}
BENCHMARK(BM_WeylSumDirect)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_ErgodicIntegral(benchmark::State& st) {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const GroupElement x{0.2, 0.3, 0.4};
  const double T = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(ergodic_integral(f, a, x, T));
}
BENCHMARK(BM_ErgodicIntegral)->Arg(1000)->Arg(100000);

void BM_TrajectoryMoments(benchmark::State& st) {
  const Frame a = golden_frame();
  const Observable f = lift_R_chi(CharLabel{0, 1}, a);
  const GroupElement x{0.2, 0.3, 0.4};
  for (auto _ : st) benchmark::DoNotOptimize(trajectory_moments(f, a, x, 1000.0, 0.01, 60));
}
BENCHMARK(BM_TrajectoryMoments)->Unit(benchmark::kMillisecond);

void BM_LineResidual(benchmark::State& st) {
  const LineGrid g = LineGrid::make(st.range(0), 1024.0);
  const LineFunction f = LineFunction::sample(g, [](double u) { return cplx(std::exp(-2 * u * u)); });
  for (auto _ : st) benchmark::DoNotOptimize(l2_convergence_residual(f, 256.0));
}
BENCHMARK(BM_LineResidual)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_VTrajectory(benchmark::State& st) {
  const Frame a = golden_frame();
  const TimeChange al(lift_R_chi(CharLabel{0, 1}, a), 0.25, a);
  const GroupElement x{0.2, 0.3, 0.4};
  const double t = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(VTrajectory(al, x).at(t));
}
BENCHMARK(BM_VTrajectory)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
