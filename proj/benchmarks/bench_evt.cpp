#include <adequacy/evt.hpp>

#include "test_support.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_FitGpd(benchmark::State& state) {
    const auto y = testsupport::gpd_sample(2000.0, -0.25, static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::evt::fit_gpd(y));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitGpd)->Arg(176)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ThresholdScan(benchmark::State& state) {
    const auto season = testsupport::synthetic_season("2007-08", 2007, 3);
    const auto dnw = season.demand_net_of_wind();
    const auto lo = adequacy::evt::select_threshold(dnw, 0.8);
    const auto hi = adequacy::evt::select_threshold(dnw, 0.99);
    const auto grid = adequacy::evt::threshold_grid(lo, hi, (hi - lo) / 24.0);
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::evt::threshold_scan(dnw, grid));
}
BENCHMARK(BM_ThresholdScan)->Unit(benchmark::kMillisecond);

}  // namespace
