// Serial reference vs OpenMP kernel for each parallel hot spot.
// The second argument of every benchmark is the worker count (0 = serial).

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "vcprobe/classifiers.hpp"
#include "vcprobe/estimator.hpp"
#include "vcprobe/phi_model.hpp"
#include "vcprobe/simulation.hpp"

using namespace vcprobe;

namespace {

ExecConfig exec_for(const benchmark::State& state) {
    const auto workers = static_cast<int>(state.range(1));
    return workers == 0 ? ExecConfig{Exec::Serial} : ExecConfig{Exec::Parallel, workers};
}

void BM_SimulateXi(benchmark::State& state) {
    SimulationPlan plan;
    plan.grid = DesignGrid({4, 6, 10, 16, 26, 42, 60, 80, 100, 140});
    plan.m = static_cast<int>(state.range(0));
    plan.master_seed = 1;
    plan.family = std::make_shared<Interval1D>();
    const auto exec = exec_for(state);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_xi(plan, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan.grid.size()) * plan.m);
}

void BM_DerivativeRange(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    const auto exec = exec_for(state);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::derivative_range(100, 0.1, 50.0, count, exec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ObjectiveScan(benchmark::State& state) {
    std::vector<std::int64_t> points;
    std::vector<double> means;
    for (std::int64_t n = 10; n <= 1000; n += 10) {
        points.push_back(n);
        means.push_back(phi_value(7.0, static_cast<double>(n)));
    }
    std::vector<double> hs;
    for (std::int64_t i = 0; i < state.range(0); ++i) hs.push_back(0.01 * static_cast<double>(i));
    const auto exec = exec_for(state);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::objective_scan(points, means, hs, exec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SimulateXi)->ArgsProduct({{20}, {0, 1, 2, 4, 8}})->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DerivativeRange)->ArgsProduct({{1 << 16}, {0, 1, 2, 4, 8}})->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObjectiveScan)->ArgsProduct({{4000}, {0, 1, 2, 4, 8}})->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
