#include <benchmark/benchmark.h>

#include <random>

#include "decomp/decomposition.hpp"
#include "decomp/oracle.hpp"
#include "decomp/separation.hpp"
#include "decomp/ufp.hpp"

using namespace decomp;

namespace {

BlockData bench_block(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BlockData b;
  for (int i = 0; i < k; ++i) b.demands.push_back(1 + rng() % 100);
  b.capacity = std::max<std::int64_t>(1, b.total_demand() / 2);
  return b;
}

DualWeights bench_weights(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pd(-50, 50);
  DualWeights w;
  for (int i = 0; i < k; ++i) w.profits.push_back(pd(rng));
  w.overflow_price = 10.0;
  return w;
}

void BM_CapacityOracle(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto block = bench_block(k, 1);
  auto w = bench_weights(k, 2);
  for (auto _ : state) benchmark::DoNotOptimize(capacity_oracle(block, w));
}
BENCHMARK(BM_CapacityOracle)->Arg(8)->Arg(32)->Arg(128);

void BM_Separation(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto block = bench_block(k, 3);
  BlockPoint p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(0.2, 0.8);
  for (int i = 0; i < k; ++i) p.flows.push_back(ud(rng));
  p.overflow = 0.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        separate(p, block, Normalization::natural()));
}
BENCHMARK(BM_Separation)->Arg(6)->Arg(12);

void BM_DantzigWolfe(benchmark::State& state) {
  GeneratorParams params;
  params.nodes = static_cast<int>(state.range(0));
  params.d_max = 40;
  params.capacity = 120;
  params.max_commodities = 8;
  auto inst = generate_instance(params, 11);
  auto prob = build_problem(inst, build_path_set(inst, kDefaultPathCount));
  for (auto _ : state)
    benchmark::DoNotOptimize(run_dantzig_wolfe(prob, {}));
}
BENCHMARK(BM_DantzigWolfe)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
