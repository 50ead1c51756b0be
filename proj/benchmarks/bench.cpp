#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "parisian/adjustment.hpp"
#include "parisian/diffusion.hpp"
#include "parisian/hjb.hpp"
#include "parisian/numerics.hpp"
#include "parisian/simulator.hpp"

using namespace parisian;

namespace {

const MarketParams kP1{};
const SeverityModel kExp1 = SeverityModel::exponential(1.0);

void BM_FindRoot(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            numerics::find_root({[](double g) { return 1.2 * g * g - 0.9 * g - 1.1; }, 0.1, 10.0, 1e-12}));
    }
}
BENCHMARK(BM_FindRoot);

void BM_SolveDiffusion(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve_diffusion(kP1, kExp1));
}
BENCHMARK(BM_SolveDiffusion);

void BM_Gamma1(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(gamma1(kP1, kExp1));
}
BENCHMARK(BM_Gamma1)->Unit(benchmark::kMillisecond);

void BM_HamiltonianMin(benchmark::State& state) {
    const auto atoms = hjb::discretize_severity(kExp1, static_cast<std::size_t>(state.range(0)));
    auto lookup = [](double z) { return 0.5 * std::exp(-0.5 * z); };
    for (auto _ : state) benchmark::DoNotOptimize(hjb::hamiltonian_min(0.3, -0.2, lookup, kP1, atoms));
}
BENCHMARK(BM_HamiltonianMin)->Arg(50)->Arg(200);

void BM_HjbSolve(benchmark::State& state) {
    const hjb::GridSpec spec{-12.0, 16.0, static_cast<std::size_t>(state.range(0)), 50};
    for (auto _ : state) benchmark::DoNotOptimize(hjb::solve(kP1, kExp1, spec));
}
BENCHMARK(BM_HjbSolve)->Arg(141)->Arg(281)->Unit(benchmark::kMillisecond);

void BM_SimulateFullRetention(benchmark::State& state) {
    sim::SimConfig cfg;
    cfg.n_paths = static_cast<std::size_t>(state.range(0));
    cfg.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(sim::estimate(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateFullRetention)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
