#include <benchmark/benchmark.h>

#include <algorithm>

#include "fcc/fcc.hpp"
#include "fcc/statistics.hpp"
#include "fcc/synthetic.hpp"

namespace {

using namespace fcc;

// Synthetic instance with about 25 matched camera pairs per camera.
const LabeledInstance& instance(int cameras) {
  static std::vector<std::pair<int, LabeledInstance>> cache;
  for (const auto& [n, inst] : cache) {
    if (n == cameras) return inst;
  }
  SyntheticConfig sc;
  sc.num_cameras = cameras;
  sc.pair_prob = std::min(1.0, 25.0 / cameras);
  sc.seed = 7;
  cache.emplace_back(cameras, generate_instance(sc));
  return cache.back().second;
}

void set_counters(benchmark::State& state, const LabeledInstance& inst) {
  state.counters["nnz_x"] = static_cast<double>(inst.graph.adjacency().nnz());
  state.counters["edges/s"] =
      benchmark::Counter(static_cast<double>(inst.graph.edge_count()), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Square(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(multiply(inst.graph.adjacency(), inst.graph.adjacency()));
  set_counters(state, inst);
}

void BM_Powers(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  PowerWorkspace ws;
  ws.compute(inst.graph.adjacency(), inst.graph.partition(), 2, 2);
  for (auto _ : state) ws.compute(inst.graph.adjacency(), inst.graph.partition(), 2, 2);
  set_counters(state, inst);
}

void BM_MaskedS1(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  const auto support = inst.graph.upper_edges();
  PowerWorkspace ws;
  ws.compute(inst.graph.adjacency(), inst.graph.partition(), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ws.s1(support));
  set_counters(state, inst);
}

void BM_MaskedS1PlusS2(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  const auto support = inst.graph.upper_edges();
  PowerWorkspace ws;
  ws.compute(inst.graph.adjacency(), inst.graph.partition(), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ws.s1_plus_s2(support));
  set_counters(state, inst);
}

void BM_FccIteration(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  FccConfig cfg;
  cfg.iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fcc_run(inst.graph, cfg));
  set_counters(state, inst);
}

}  // namespace

BENCHMARK(BM_Square)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Powers)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaskedS1)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaskedS1PlusS2)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FccIteration)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
