#include <benchmark/benchmark.h>

#include "ethsm/markov.hpp"
#include "ethsm/revenue.hpp"
#include "ethsm/rewards.hpp"

using namespace ethsm;

static void BM_ClosedForm(benchmark::State& state) {
  MiningConfig c{0.4, 0.5};
  int trunc = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto dist = stationary_closed_form(c, trunc);
    benchmark::DoNotOptimize(dist.pi(0, 0));
  }
}
BENCHMARK(BM_ClosedForm)->Arg(60)->Arg(120)->Arg(200);

static void BM_NumericSolve(benchmark::State& state) {
  MiningConfig c{0.4, 0.5};
  int trunc = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto dist = stationary_numeric(c, trunc, 1e-10, 100000);
    benchmark::DoNotOptimize(dist.pi(0, 0));
  }
}
BENCHMARK(BM_NumericSolve)->Arg(60)->Arg(120);

static void BM_MultisumTable(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    MultisumTable table(n, n);
    benchmark::DoNotOptimize(table.f(n + 1, 0, n));
  }
}
BENCHMARK(BM_MultisumTable)->Arg(50)->Arg(200);

static void BM_AggregateRevenue(benchmark::State& state) {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  auto dist = stationary_closed_form(c, 160);
  for (auto _ : state) {
    auto rev = aggregate_revenue(dist, c, eth);
    benchmark::DoNotOptimize(rev.pool_total());
  }
}
BENCHMARK(BM_AggregateRevenue);

static void BM_Threshold(benchmark::State& state) {
  RewardSchedule eth = RewardSchedule::ethereum();
  for (auto _ : state) {
    auto t = profitability_threshold(0.5, eth, Scenario::MainChainDifficulty,
                                     120);
    benchmark::DoNotOptimize(t.alpha);
  }
}
BENCHMARK(BM_Threshold);
