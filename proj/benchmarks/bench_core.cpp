#include <benchmark/benchmark.h>

#include "inhomwalk/engine.hpp"
#include "inhomwalk/family.hpp"
#include "inhomwalk/gaussian.hpp"
#include "inhomwalk/harness.hpp"
#include "inhomwalk/montecarlo.hpp"
#include "inhomwalk/spectral.hpp"

using namespace inhomwalk;

namespace {

StepSchedule skewed(std::size_t n) {
  const FamilySpec fam = standard_family();
  for (const auto& m : fam.members)
    if (m.name == "skewed") return m.schedule(n);
  return fam.members.front().schedule(n);
}

void BM_EventProbFloor(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const StepSchedule s = skewed(n);
  const PathConstraint c(n, std::vector<std::optional<Band>>(n, Band{0.0, kInf}), false, {}, std::nullopt);
  for (auto _ : state) benchmark::DoNotOptimize(event_prob(1, s, c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EventProbFloor)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_EventProbStrip(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const StepSchedule s = StepSchedule::homogeneous(lazy_walk(), n);
  const PathConstraint c(n, std::vector<std::optional<Band>>(n, Band{-8.0, 8.0}), false, {}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(event_prob(0, s, c));
}
BENCHMARK(BM_EventProbStrip)->Arg(256)->Arg(4096);

void BM_FourierPoint(benchmark::State& state) {
  const StepSchedule s = skewed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fourier_point_prob(s, 3));
}
BENCHMARK(BM_FourierPoint)->Arg(64)->Arg(512);

void BM_LltSweep(benchmark::State& state) {
  const StepSchedule s = StepSchedule::homogeneous(lazy_walk(), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(llt_sweep(s, 0.0));
}
BENCHMARK(BM_LltSweep)->Arg(256)->Arg(1024);

void BM_GaussianCheckpoints(benchmark::State& state) {
  GaussianSchedule g{std::vector<double>(30, 0.7), 1.0};
  const std::vector<GaussCheckpoint> cps{
      {10, unit_cells({-2, -1, 0, 1, 2, 3}), 3.0},
      {20, unit_cells({-1, 0, 1}), 2.5},
      {30, unit_cells({0, 1, 2, 3, 4}), 4.0},
  };
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_checkpoint_prob(g, cps).value);
}
BENCHMARK(BM_GaussianCheckpoints)->Unit(benchmark::kMillisecond);

void BM_EstimateEvent(benchmark::State& state) {
  const std::size_t n = 128;
  const StepSchedule s = skewed(n);
  const PathConstraint c(n, std::vector<std::optional<Band>>(n, Band{-12.0, 12.0}), false, {}, std::nullopt);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_event(s, 0, c, 10000, 7).value);
}
BENCHMARK(BM_EstimateEvent)->Unit(benchmark::kMillisecond);

void BM_VerifyBallot(benchmark::State& state) {
  const FamilySpec fam = standard_family();
  HarnessOptions opt;
  opt.parallelism = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_ballot(fam, opt).pass);
}
BENCHMARK(BM_VerifyBallot)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
