// Serial vs OpenMP kernel comparison: node scoring, candidate-set refresh and
// batch propagation over generated systems. Run ./gravitas_bench after a
// build; pass --benchmark_filter=... to narrow it down.

#include <benchmark/benchmark.h>

#include "gravitas/cvss.hpp"
#include "gravitas/optimizer.hpp"
#include "gravitas/propagation.hpp"
#include "gravitas/system_builder.hpp"
#include "gravitas/tasc.hpp"
#include "gravitas/template_catalog.hpp"

#ifndef GRAVITAS_DATA_DIR
#define GRAVITAS_DATA_DIR "data"
#endif

namespace {

using namespace gravitas;

const MasterTemplate& master() {
  static MasterTemplate t =
      load_master_template_file(std::string(GRAVITAS_DATA_DIR) + "/master_template.json");
  return t;
}

GeneratedSystem generated(int devices, std::uint64_t seed) {
  GenParams p = GenParams::defaults();
  p.device_count = devices;
  p.seed = seed;
  p.defense_density = 2.0;
  return generate_system(p, master(), FactorTable{});
}

SystemGraph built_graph(int devices, std::uint64_t seed) {
  GeneratedSystem sys = generated(devices, seed);
  BuildResult build = build_system(sys.spec, master(), FactorTable{});
  return std::move(build.graph);
}

void BM_ScoreAllNodes(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const int devices = static_cast<int>(state.range(1));
  SystemGraph g = built_graph(devices, 17);
  FactorTable table;
  for (auto _ : state) {
    score_all_nodes(g, table, parallel);
    benchmark::DoNotOptimize(g.nodes().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.nodes().size()));
  state.SetLabel(parallel ? "openmp" : "serial");
}

void BM_PropagateBatch(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const int systems = 8;
  std::vector<SystemGraph> graphs;
  PropagationParams prop;
  prop.exp_weight = 0.2;
  for (int s = 0; s < systems; ++s) {
    SystemGraph g = built_graph(30, 100 + s);
    score_all_nodes(g, FactorTable{});
    graphs.push_back(std::move(g));
  }
  for (auto _ : state) {
    state.PauseTiming();
    std::vector<SystemGraph> work = graphs;
    state.ResumeTiming();
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < systems; ++i) propagate_scores(work[i], prop);
    benchmark::DoNotOptimize(work.data());
  }
  state.SetItemsProcessed(state.iterations() * systems);
  state.SetLabel(parallel ? "openmp" : "serial");
}

void BM_OptimizerRounds(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  GeneratedSystem sys = generated(40, 23);
  BuildResult build = build_system(sys.spec, master(), FactorTable{});
  score_all_nodes(build.graph, FactorTable{});

  OptimizerParams params;
  params.set_size = 12;
  params.max_defenses = 10;
  params.seed = 5;
  params.parallel = parallel;
  for (auto _ : state) {
    OptimizeResult result = optimize(build.graph, sys.catalog, params, sys.spec.propagation);
    benchmark::DoNotOptimize(result.history.data());
  }
  state.SetLabel(parallel ? "openmp" : "serial");
}

}  // namespace

BENCHMARK(BM_ScoreAllNodes)->Args({0, 50})->Args({1, 50})->Args({0, 150})->Args({1, 150});
BENCHMARK(BM_PropagateBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OptimizerRounds)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
