#include <benchmark/benchmark.h>

#include "superrad/coupling.hpp"
#include "superrad/criteria.hpp"
#include "superrad/lattice.hpp"
#include "superrad/oracle.hpp"

using namespace superrad;

static void BM_CubicTotalFast(benchmark::State& state) {
    const auto spec = LatticeSpec::cubic(static_cast<std::size_t>(state.range(0)), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(gdot_total_fast(spec, 1).gdot0);
    state.SetComplexityN(static_cast<int64_t>(spec.n_atoms()));
}
BENCHMARK(BM_CubicTotalFast)->RangeMultiplier(2)->Range(4, 64)->Complexity(benchmark::oN);

static void BM_CubicTotalPairSum(benchmark::State& state) {
    const auto cloud = cubic_lattice(static_cast<std::size_t>(state.range(0)), 1.0);
    for (auto _ : state) {
        const auto c = build_coupling(cloud, 1);
        benchmark::DoNotOptimize(gdot_total_inverted(c).gdot0);
    }
    state.SetComplexityN(static_cast<int64_t>(cloud.size()));
}
BENCHMARK(BM_CubicTotalPairSum)->RangeMultiplier(2)->Range(4, 16)->Complexity(benchmark::oNSquared);

static void BM_SquareSeries(benchmark::State& state) {
    const auto shape = LatticeSpec::square(1, 1.0);
    const auto n1_max = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(scaled_slope_series(shape, n1_max, RateKind::Total, {}, 1));
}
BENCHMARK(BM_SquareSeries)->Arg(250)->Arg(500)->Arg(1000);

static void BM_LinePartialTotal(benchmark::State& state) {
    const auto cloud = line_lattice(static_cast<std::size_t>(state.range(0)), 0.55);
    const auto c = build_coupling(cloud, 1);
    const DriveSpec drive{2.0, Vec3::UnitZ()};
    for (auto _ : state) benchmark::DoNotOptimize(gdot_total_partial(c, cloud, drive).gdot0);
}
BENCHMARK(BM_LinePartialTotal)->Arg(25)->Arg(50)->Arg(100);

static void BM_OracleRhs(benchmark::State& state) {
    const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 0.9, 0.1, 1);
    const auto c = build_coupling(cloud);
    const auto rho = initial_state(cloud, DriveSpec{});
    for (auto _ : state) benchmark::DoNotOptimize(lindblad_rhs(rho.matrix(), c));
}
BENCHMARK(BM_OracleRhs)->DenseRange(2, 6, 2);
BENCHMARK_MAIN();
