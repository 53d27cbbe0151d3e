#include <adequacy/uncertainty.hpp>

#include <benchmark/benchmark.h>

#include <vector>

namespace {

const std::vector<double> kSeasons{2.82, 2.22, 4.02, 16.77, 1.92, 7.69, 0.15};

void BM_SeasonBootstrap(benchmark::State& state) {
    adequacy::uncertainty::BootstrapConfig cfg;
    cfg.replications = static_cast<std::size_t>(state.range(0));
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::uncertainty::season_bootstrap(kSeasons, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SeasonBootstrap)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_BlockBootstrapMemoized(benchmark::State& state) {
    adequacy::uncertainty::BootstrapConfig cfg;
    cfg.seed = 1;
    const adequacy::uncertainty::BlockPipeline mean = [](std::span<const std::size_t> blocks) {
        double s = 0.0;
        for (auto b : blocks) s += kSeasons[b];
        return std::vector<double>{s / 7.0};
    };
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::uncertainty::block_bootstrap(7, mean, cfg, state.range(0) != 0));
}
BENCHMARK(BM_BlockBootstrapMemoized)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
