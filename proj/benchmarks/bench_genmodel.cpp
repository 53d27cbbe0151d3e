#include <adequacy/genmodel.hpp>

#include "test_support.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_ConvolveFleet(benchmark::State& state) {
    const auto units = testsupport::synthetic_fleet(static_cast<std::size_t>(state.range(0)), 1, 0.6);
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::gen::convolve_fleet(units));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveFleet)->RangeMultiplier(2)->Range(25, 400)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace
