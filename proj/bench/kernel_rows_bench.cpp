#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "defcast/forecaster.hpp"
#include "defcast/kernel_rows.hpp"
#include "reference.hpp"

namespace {

using defcast::KernelRows;
using defcast::KernelSpec;

struct History {
    KernelRows rows;
    std::vector<defcast::ForecastPoint> points;
};

History make_history(std::size_t n) {
    History h{KernelRows(KernelSpec::gaussian(1.0), 2), {}};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x{u(rng), u(rng)};
        const auto p = defcast::Simplex::binary(u(rng));
        const std::size_t y = u(rng) < 0.5 ? 0 : 1;
        h.rows.append(defcast::PointView{x, p.weights(), y});
        h.points.emplace_back(std::move(x), p, y);
    }
    return h;
}

void BM_AccumulateParallel(benchmark::State& state) {
    const auto h = make_history(static_cast<std::size_t>(state.range(0)));
    const std::vector<double> x{0.3, 0.6};
    const auto cache = h.rows.prepare(x);
    const std::vector<double> p{0.4, 0.6};
    std::vector<double> b(2);
    std::vector<double> scratch;
    for (auto _ : state) {
        b.assign(2, 0.0);
        h.rows.accumulate(cache, p, b, scratch);
        benchmark::DoNotOptimize(b.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AccumulateSerial(benchmark::State& state) {
    const auto h = make_history(static_cast<std::size_t>(state.range(0)));
    const std::vector<double> x{0.3, 0.6};
    const auto cache = h.rows.prepare(x);
    const std::vector<double> p{0.4, 0.6};
    std::vector<double> b(2);
    std::vector<double> scratch;
    for (auto _ : state) {
        b.assign(2, 0.0);
        h.rows.accumulate_serial(cache, p, b, scratch);
        benchmark::DoNotOptimize(b.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ReferenceGain(benchmark::State& state) {
    const auto h = make_history(static_cast<std::size_t>(state.range(0)));
    const std::vector<double> x{0.3, 0.6};
    const auto p = defcast::Simplex::binary(0.6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(defcast::reference::gain(KernelSpec::gaussian(1.0), h.points, x, p, 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BinaryForecast(benchmark::State& state) {
    defcast::ForecastState fs(KernelSpec::gaussian(1.0), 2);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        const std::vector<double> x{u(rng)};
        const auto p = defcast::defensive_forecast(fs, x);
        fs.observe(x, p, u(rng) < 0.7 ? 1 : 0);
    }
    const std::vector<double> x{0.5};
    for (auto _ : state) benchmark::DoNotOptimize(defcast::defensive_forecast(fs, x));
}

}  // namespace

BENCHMARK(BM_AccumulateParallel)->RangeMultiplier(4)->Range(512, 32768);
BENCHMARK(BM_AccumulateSerial)->RangeMultiplier(4)->Range(512, 32768);
BENCHMARK(BM_ReferenceGain)->RangeMultiplier(4)->Range(512, 8192);
BENCHMARK(BM_BinaryForecast)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
