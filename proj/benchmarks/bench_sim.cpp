#include <benchmark/benchmark.h>

#include "ethsm/sim.hpp"

using namespace ethsm;

static void BM_SimulatorThroughput(benchmark::State& state) {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  long long blocks = state.range(0);
  for (auto _ : state) {
    SimResult r = run_simulation(c, eth, blocks, 1, 42, {}, 1);
    benchmark::DoNotOptimize(r.block_pool.mean);
  }
  state.SetItemsProcessed(state.iterations() * blocks);
}
BENCHMARK(BM_SimulatorThroughput)->Arg(10000)->Arg(100000)
    ->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_SimulatorParallelRuns(benchmark::State& state) {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SimResult r = run_simulation(c, eth, 20000, 8, 42, {}, workers);
    benchmark::DoNotOptimize(r.block_pool.mean);
  }
  state.SetItemsProcessed(state.iterations() * 20000 * 8);
}
BENCHMARK(BM_SimulatorParallelRuns)->Arg(1)->Arg(4)
    ->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_DiscreteMinerMode(benchmark::State& state) {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  SimOptions opt;
  opt.n_miners = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SimResult r = run_simulation(c, eth, 20000, 1, 42, opt, 1);
    benchmark::DoNotOptimize(r.block_pool.mean);
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_DiscreteMinerMode)->Arg(0)->Arg(1000)
    ->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
