#include <benchmark/benchmark.h>

#include "gridflux/feeder_io.hpp"
#include "gridflux/metrics.hpp"
#include "gridflux/sweep.hpp"

using namespace gridflux;

namespace {

std::shared_ptr<const Feeder> tree25() {
    static const auto f = std::make_shared<const Feeder>(load_feeder(std::string(GRIDFLUX_FEEDER_DIR) + "/tree25_pv.json"));
    return f;
}

std::vector<Scenario> scenarios(std::size_t steps) {
    std::vector<Scenario> out;
    for (std::uint64_t seed = 1; seed <= 8; ++seed)
        for (ControlMode m : {ControlMode::none, ControlMode::thevenin, ControlMode::pfm}) {
            ScenarioConfig c;
            c.control = m;
            c.seed = seed;
            c.variability = 0.7;
            c.steps = steps;
            Scenario sc = make_scenario(tree25(), c);
            sc.record_measurements = false;
            out.push_back(std::move(sc));
        }
    return out;
}

void BM_sweep_serial(benchmark::State& state) {
    const auto sc = scenarios(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(sc));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sc.size()) * state.range(0));
}

void BM_sweep_parallel(benchmark::State& state) {
    const auto sc = scenarios(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(sc));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sc.size()) * state.range(0));
    state.counters["threads"] = sweep_threads();
}

// one long uncontrolled series, so the metric kernels dominate
const std::vector<std::vector<double>>& long_series() {
    static const auto series = [] {
        ScenarioConfig c;
        c.variability = 0.7;
        c.seed = 3;
        const auto r = run(make_scenario(tree25(), c));
        std::vector<std::vector<double>> out;
        // replicate the day so the kernel sees a sweep-sized batch
        for (int rep = 0; rep < 16; ++rep)
            for (const auto& [b, p] : r.metrics.keys) out.push_back(r.voltage_series(b, p));
        return out;
    }();
    return series;
}

void BM_savfi_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(savfi_all_serial(long_series(), 15));
}

void BM_savfi_parallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(savfi_all(long_series(), 15));
}

}  // namespace

BENCHMARK(BM_sweep_serial)->Arg(120)->Arg(720)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_parallel)->Arg(120)->Arg(720)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_savfi_serial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_savfi_parallel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
