#include <benchmark/benchmark.h>

#include "ppbt/bayes.hpp"
#include "ppbt/decision_table.hpp"
#include "ppbt/designs.hpp"
#include "ppbt/replicates.hpp"

using namespace ppbt;

namespace {

void BM_ProbGreater(benchmark::State& state) {
    const BetaParams prior{0.5, 0.5};
    const auto trt = posterior(prior, {50, 15});
    const auto ctl = posterior(prior, {50, 6});
    for (auto _ : state) {
        benchmark::DoNotOptimize(prob_greater(trt, ctl));
    }
}
BENCHMARK(BM_ProbGreater);

// Non-half-integer shapes exercise the graded nodes.
void BM_ProbGreaterGeneralShapes(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(prob_greater({3.3, 40.7}, {0.65, 44.2}));
    }
}
BENCHMARK(BM_ProbGreaterGeneralShapes);

void BM_FinalAnalysisGrid(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        FinalAnalysisGrid grid(n, n, {0.5, 0.5});
        benchmark::DoNotOptimize(&grid);
    }
}
BENCHMARK(BM_FinalAnalysisGrid)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_PPPUncached(benchmark::State& state) {
    const FinalAnalysisGrid grid(50, 50, {0.5, 0.5});
    for (auto _ : state) {
        benchmark::DoNotOptimize(ppp_two_sample({20, 6}, {20, 3}, grid, 0.9));
    }
}
BENCHMARK(BM_PPPUncached);

void BM_PPPCached(benchmark::State& state) {
    const PPPEngine engine({0.5, 0.5});
    engine.ppp({20, 6}, {20, 3}, 50, 50, 0.9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(engine.ppp({20, 6}, {20, 3}, 50, 50, 0.9));
    }
}
BENCHMARK(BM_PPPCached);

void BM_BuildTable(benchmark::State& state) {
    const PPPEngine engine({0.5, 0.5});
    engine.grid(50, 50);
    for (auto _ : state) {
        auto t = build_table("pooled", {10, 0, 50, 50}, {0.9, 0.1}, engine);
        benchmark::DoNotOptimize(t);
    }
}
BENCHMARK(BM_BuildTable)->Unit(benchmark::kMillisecond);

void BM_RunReplicates(benchmark::State& state) {
    const auto kind = static_cast<int>(state.range(0));
    const DesignConfig design = kind == 0   ? DesignConfig::pooled()
                                : kind == 1 ? DesignConfig::stratified()
                                            : DesignConfig::enrichment(0.5);
    const PPPEngine engine({0.5, 0.5});
    const auto scenario = ScenarioRates::paper_alternative();
    run_replicates(design, {0.9, 0.1}, scenario, 50, {}, engine);  // warm caches
    for (auto _ : state) {
        auto out = run_replicates(design, {0.9, 0.1}, scenario, 200, {}, engine);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_RunReplicates)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
