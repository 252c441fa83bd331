#include "casimir/force.hpp"
#include "casimir/screening.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace casimir;

namespace {

const ThermoState th{};

const DensityProfile& plasma() {
    const double n = 1.0 / (8.0 * M_PI);
    static const DensityProfile p = DensityProfile::build(
        th, {{"e", SpeciesParams::make(th, -1.0, 1.0 / 0.09), n}, {"i", SpeciesParams::make(th, 1.0, 1.0 / 0.09), n}},
        CellOptions{}, true);
    return p;
}

void BM_BridgeSample(benchmark::State& state) {
    const BridgeSampler bs(static_cast<int>(state.range(0)), 1);
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(bs.sample(2, i++));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BridgeSample)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oN);

// Dense LU on the slab grid: cost grows with the cube of the node count.
void BM_ScreeningSolve(benchmark::State& state) {
    const double h = 10.0 / static_cast<double>(state.range(0));
    const Region plate{-10.0, 0.0, &plasma(), 0.0};
    const Loop src{{-5.0, 0, 0}, plasma().species[0].params, sample_bridge(1, 32, 3)};
    for (auto _ : state) benchmark::DoNotOptimize(ScreeningSolver({plate}, th, 0.5, {h}).solve(src).field(-4.0));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScreeningSolve)->RangeMultiplier(2)->Range(50, 400)->Complexity(benchmark::oNCubed)->Unit(benchmark::kMillisecond);

void BM_WmPairFourier(benchmark::State& state) {
    ThermoState t;
    t.c = 20.0;
    const SpeciesParams sp = SpeciesParams::make(t, 1.0, 1.0);
    const int n = static_cast<int>(state.range(0));
    const Loop i{{0, 0, 0}, sp, sample_bridge(1, n, 5)}, j{{0, 3.0, 0}, sp, sample_bridge(1, n, 6)};
    for (auto _ : state) benchmark::DoNotOptimize(wm_pair_fourier(i, j, {0.3, 0.4, 0.0}, t, FormFactor{4.0}));
    state.SetComplexityN(n);
}
BENCHMARK(BM_WmPairFourier)->RangeMultiplier(2)->Range(16, 128)->Complexity(benchmark::oNSquared);

void BM_Zeta3Quadrature(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(zeta3_quadrature());
}
BENCHMARK(BM_Zeta3Quadrature);

}  // namespace
BENCHMARK_MAIN();
