// Serial reference vs OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.

#include "convexmetrics/kernels.hpp"
#include "convexmetrics/measures.hpp"
#include "convexmetrics/transport.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

namespace cm = convexmetrics;

namespace {

cm::Execution exec_of(const benchmark::State& state) {
    return state.range(0) == 0 ? cm::Execution::Serial : cm::Execution::Parallel;
}

std::vector<double> cloud(std::size_t m, std::uint64_t seed) {
    cm::Rng rng(seed);
    std::vector<double> x(m);
    for (auto& v : x) v = rng.normal();
    return x;
}

void BM_MonteCarlo(benchmark::State& state) {
    const auto exec = exec_of(state);
    for (auto _ : state) {
        auto stats = cm::kernels::monte_carlo(
            7, 1 << 20, [](cm::Rng& rng) { return std::log1p(std::abs(rng.normal())); }, exec);
        benchmark::DoNotOptimize(stats.mean);
    }
    state.SetItemsProcessed(state.iterations() * (1 << 20));
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CostMatrix(benchmark::State& state) {
    const auto exec = exec_of(state);
    const std::size_t m = 1500;
    const auto x = cloud(2 * m, 1);
    const auto y = cloud(2 * m, 2);
    for (auto _ : state) {
        auto c = cm::kernels::cost_matrix(x, y, 2, 1.5, exec);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m * m));
}
BENCHMARK(BM_CostMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Softmin(benchmark::State& state) {
    const auto exec = exec_of(state);
    const std::size_t m = 2000;
    const auto x = cloud(m, 3);
    const auto y = cloud(m, 4);
    const auto c = cm::kernels::cost_matrix(x, y, 1, 2.0, cm::Execution::Serial);
    const std::vector<double> g(m, 0.0);
    const std::vector<double> log_w(m, -std::log(static_cast<double>(m)));
    std::vector<double> out(m);
    for (auto _ : state) {
        cm::kernels::softmin_rows(c, m, m, g, log_w, 0.05, out, exec);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m * m));
}
BENCHMARK(BM_Softmin)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Sinkhorn(benchmark::State& state) {
    cm::SinkhornOptions opts;
    opts.exec = exec_of(state);
    const auto a = cm::EmpiricalMeasure::uniform(1, cloud(800, 5));
    const auto b = cm::EmpiricalMeasure::uniform(1, cloud(800, 6));
    for (auto _ : state) {
        auto plan = cm::sinkhorn_ot_cost(a, b, 2.0, opts);
        benchmark::DoNotOptimize(plan.cost);
    }
}
BENCHMARK(BM_Sinkhorn)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Sample(benchmark::State& state) {
    const auto exec = exec_of(state);
    const auto spec = cm::DistributionSpec::cauchy_type(3, 4.0);
    for (auto _ : state) {
        auto e = cm::sample(spec, 11, 200000, exec);
        benchmark::DoNotOptimize(e.points().data());
    }
}
BENCHMARK(BM_Sample)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
