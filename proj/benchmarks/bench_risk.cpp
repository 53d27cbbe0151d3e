#include <adequacy/dnw.hpp>
#include <adequacy/genmodel.hpp>
#include <adequacy/risk.hpp>

#include "test_support.hpp"

#include <benchmark/benchmark.h>

namespace {

struct System {
    adequacy::DiscretePmf fleet;
    adequacy::DiscretePmf dnw;
    adequacy::dnw::TailModel independence;
};

const System& system_under_test() {
    static const System s = [] {
        const auto season = testsupport::synthetic_season("2007-08", 2007, 11);
        System out{adequacy::gen::convolve_fleet(testsupport::fleet_for_target(season, 200, 12, 3.0)),
                   adequacy::dnw::discretize(adequacy::dnw::build_evt_model(season.demand_net_of_wind(), 0.95)),
                   adequacy::dnw::build_independence_model(season.demand(), season.wind())};
        return out;
    }();
    return s;
}

void BM_RiskByConvolution(benchmark::State& state) {
    const auto& s = system_under_test();
    for (auto _ : state) {
        benchmark::DoNotOptimize(adequacy::risk::compute_metrics(adequacy::risk::balance_distribution(s.fleet, s.dnw), 3528.0));
    }
}
BENCHMARK(BM_RiskByConvolution)->Unit(benchmark::kMillisecond);

void BM_RiskByKernel(benchmark::State& state) {
    const auto& s = system_under_test();
    const adequacy::risk::ShortfallKernel kernel(s.fleet);
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::risk::shortfall_metrics(kernel, s.dnw, 3528.0));
}
BENCHMARK(BM_RiskByKernel)->Unit(benchmark::kMicrosecond);

void BM_KernelBuild(benchmark::State& state) {
    const auto& s = system_under_test();
    for (auto _ : state) benchmark::DoNotOptimize(adequacy::risk::ShortfallKernel(s.fleet));
}
BENCHMARK(BM_KernelBuild)->Unit(benchmark::kMicrosecond);

void BM_IndependenceRisk(benchmark::State& state) {
    const auto& s = system_under_test();
    const adequacy::risk::ShortfallKernel kernel(s.fleet);
    for (auto _ : state) {
        benchmark::DoNotOptimize(adequacy::risk::independence_metrics(kernel, s.independence.demand_pmf(),
                                                                      s.independence.wind_pmf(), 3528.0));
    }
}
BENCHMARK(BM_IndependenceRisk)->Unit(benchmark::kMillisecond);

}  // namespace
