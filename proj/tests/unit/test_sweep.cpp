#include <catch_amalgamated.hpp>

#include "gridflux/comparison.hpp"
#include "gridflux/sweep.hpp"
#include "support.hpp"

using namespace gridflux;

namespace {

std::vector<Scenario> grid(std::size_t steps) {
    const auto f = gf_test::bundled_ptr("tree25_pv");
    std::vector<Scenario> out;
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
        for (ControlMode m : kStrategies) {
            ScenarioConfig c;
            c.control = m;
            c.seed = seed;
            c.variability = 0.7;
            c.steps = steps;
            out.push_back(make_scenario(f, c));
        }
    return out;
}

}  // namespace

TEST_CASE("parallel sweep is bit-identical to the serial reference") {
    const auto scenarios = grid(45);
    const auto par = run_sweep(scenarios);
    const auto ser = run_sweep_serial(scenarios);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].control == scenarios[i].control);
        CHECK(par[i].seed == scenarios[i].seed);
        CHECK(par[i].v_mag == ser[i].v_mag);
        for (std::size_t k = 0; k < par[i].metrics.savfi.size(); ++k)
            for (std::size_t w = 0; w < par[i].metrics.savfi[k].size(); ++w)
                CHECK(par[i].metrics.savfi[k][w].value == ser[i].metrics.savfi[k][w].value);
    }
}

TEST_CASE("thread count does not change results") {
    const auto scenarios = grid(20);
    const int before = sweep_threads();
    set_sweep_threads(1);
    const auto one = run_sweep(scenarios);
    set_sweep_threads(3);
    const auto three = run_sweep(scenarios);
    set_sweep_threads(before);
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].v_mag == three[i].v_mag);
}

TEST_CASE("a failing scenario surfaces from the sweep") {
    auto scenarios = grid(10);
    scenarios[5].load_multiplier.pop_back();
    CHECK_THROWS_AS(run_sweep(scenarios), Error);
    CHECK_THROWS_AS(run_sweep_serial(scenarios), Error);
}

TEST_CASE("strategy comparison tabulates matched seeds") {
    const auto f = gf_test::bundled_ptr("tree25_pv");
    ScenarioConfig base;
    base.steps = 60;
    const std::vector<double> vs{0.3, 0.7};
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto buses = pv_buses(*f);
    const auto cmp = compare_strategies(f, base, vs, seeds, buses);
    CHECK(cmp.rows.size() == buses.size() * vs.size());
    CHECK(cmp.mean_savfi.size() == vs.size());
    // 59 fluctuation samples in windows of 15 give 4 windows
    CHECK(cmp.bus_cells.cells == vs.size() * seeds.size() * buses.size() * 4);
    CHECK(cmp.phase_cells.cells >= cmp.bus_cells.cells);
    CHECK(cmp.bus_cells.fraction() >= 0.0);
    CHECK(cmp.bus_cells.fraction() <= 1.0);

    // the none column must equal a direct run averaged by hand
    const BusIndex b = buses.front();
    double direct = 0.0;
    std::size_t n = 0;
    for (auto seed : seeds) {
        ScenarioConfig c = base;
        c.seed = seed;
        c.variability = 0.3;
        const auto r = run(make_scenario(f, c));
        for (std::size_t w = 0; w < 4; ++w) {
            double bus_mean = 0.0;
            std::size_t phases = 0;
            for (std::size_t k = 0; k < r.metrics.keys.size(); ++k)
                if (r.metrics.keys[k].bus == b) {
                    bus_mean += r.metrics.savfi[k][w].value;
                    ++phases;
                }
            direct += bus_mean / static_cast<double>(phases);
            ++n;
        }
    }
    CHECK(cmp.rows.front().bus == f->bus(b).id);
    CHECK(cmp.rows.front().variability == 0.3);
    CHECK(cmp.rows.front().savfi[0] == Catch::Approx(direct / static_cast<double>(n)).epsilon(1e-12));

    CHECK_THROWS_AS(compare_strategies(f, base, {}, seeds, buses), Error);
    const std::vector<BusIndex> bad{f->num_buses()};
    CHECK_THROWS_AS(compare_strategies(f, base, vs, seeds, bad), Error);
}
