#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "gridflux/results_io.hpp"
#include "support.hpp"

using namespace gridflux;

namespace {

ScenarioResult small_run(ControlMode mode, std::size_t steps) {
    ScenarioConfig c;
    c.control = mode;
    c.variability = 0.3;
    c.seed = 4;
    c.steps = steps;
    return run(make_scenario(gf_test::bundled_ptr("tree25_pv"), c));
}

}  // namespace

TEST_CASE("empty result writes header-only files") {
    const ScenarioResult empty;
    std::ostringstream r, s;
    write_results_csv(empty, r);
    write_savfi_csv(empty, s);
    CHECK(r.str() == std::string(kResultsHeader) + "\n");
    CHECK(s.str() == std::string(kSavfiScaleComment) + "\n" + std::string(kSavfiHeader) + "\n");
    CHECK(parse_results_csv(r.str()).empty());
    CHECK(parse_savfi_csv(s.str()).empty());
}

TEST_CASE("one bus, two steps gives two rows per phase") {
    ScenarioResult r;
    r.bus_ids = {"x"};
    r.bus_phases = {*PhaseSet::parse("AC")};
    r.t_min = {0.0, 1.0};
    r.v_mag.assign(2, std::vector<PhaseArray<double>>(1));
    r.v_mag[0][0][Phase::A] = 1.01;
    r.v_mag[1][0][Phase::C] = 0.99;
    r.metrics.keys = {{0, Phase::A}, {0, Phase::C}};
    std::ostringstream out;
    write_results_csv(r, out);
    const auto rows = parse_results_csv(out.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].phase == Phase::A);
    CHECK(rows[0].v_pu == 1.01);
    CHECK(rows[3].phase == Phase::C);
    CHECK(rows[3].v_pu == 0.99);
    CHECK(rows[3].t_min == 1.0);
}

TEST_CASE("result files round trip within 1e-6") {
    const auto res = small_run(ControlMode::pfm, 40);
    std::ostringstream r, s;
    write_results_csv(res, r);
    write_savfi_csv(res, s);
    const std::string text = r.str();
    CHECK(text.rfind(std::string(kResultsHeader) + "\n", 0) == 0);

    const auto rows = parse_results_csv(text);
    REQUIRE(rows.size() == res.t_min.size() * res.metrics.keys.size());
    std::size_t i = 0;
    for (std::size_t t = 0; t < res.t_min.size(); ++t) {
        for (std::size_t k = 0; k < res.metrics.keys.size(); ++k, ++i) {
            const auto [b, ph] = res.metrics.keys[k];
            const auto& row = rows[i];
            CHECK(row.bus == res.bus_ids[b]);
            CHECK(row.phase == ph);
            CHECK(std::abs(row.t_min - res.t_min[t]) <= 1e-6);
            CHECK(std::abs(row.v_pu - res.v_mag[t][b][ph]) <= 1e-6);
            CHECK(row.flag_violation == res.metrics.violations[k].flags[t]);
            double q = 0.0;
            double p = 0.0;
            for (std::size_t u = 0; u < res.pv_bus.size(); ++u)
                if (res.pv_bus[u] == b) {
                    p += res.pv_p[t][u][ph] * res.base_kva_per_phase;
                    q += res.dispatch[t][u].phases[ph].q_setpoint * res.base_kva_per_phase;
                }
            CHECK(std::abs(row.p_inj_kw - p) <= 1e-6);
            CHECK(std::abs(row.q_inj_kvar - q) <= 1e-6);
        }
    }

    const auto srows = parse_savfi_csv(s.str());
    std::size_t j = 0;
    for (std::size_t k = 0; k < res.metrics.keys.size(); ++k)
        for (const auto& w : res.metrics.savfi[k]) {
            REQUIRE(j < srows.size());
            CHECK(srows[j].bus == res.bus_ids[res.metrics.keys[k].bus]);
            CHECK(srows[j].window_start == res.t_min[w.start]);
            CHECK(std::abs(srows[j].savfi - w.value * kSavfiScale) <= 1e-6);
            ++j;
        }
    CHECK(j == srows.size());
}

TEST_CASE("result files land in the requested directory") {
    const auto res = small_run(ControlMode::none, 5);
    const auto dir = std::filesystem::temp_directory_path() / "gridflux_results_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_results(res, dir);
    CHECK(std::filesystem::exists(dir / "results.csv"));
    CHECK(std::filesystem::exists(dir / "savfi.csv"));
    CHECK(parse_results_csv(read_text_file(dir / "results.csv")).size() == 5 * res.metrics.keys.size());
    std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("malformed result files are rejected") {
    const std::string h(kResultsHeader);
    CHECK_THROWS_AS(parse_results_csv("t,bus\n"), ParseError);
    CHECK_THROWS_AS(parse_results_csv(h + "\n0,x,A,1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_results_csv(h + "\n0,x,Q,1,0,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_results_csv(h + "\n0,x,A,one,0,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_savfi_csv(""), ParseError);
}
