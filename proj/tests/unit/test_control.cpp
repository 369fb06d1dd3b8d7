#include <catch_amalgamated.hpp>

#include <random>

#include "gridflux/control.hpp"
#include "support.hpp"

using namespace gridflux;

namespace {

LocalMeasurement measurement(double dp, std::vector<FlowDelta> children = {}, double p_now = 0.0) {
    LocalMeasurement m;
    m.bus = 1;
    m.dp_inj = dp;
    m.child_flow_deltas = std::move(children);
    m.p_inj_now = p_now;
    return m;
}

constexpr double kBig = 1e9;  // a rating that never binds

}  // namespace

TEST_CASE("control mode names") {
    for (ControlMode m : {ControlMode::none, ControlMode::thevenin, ControlMode::pfm})
        CHECK(parse_control_mode(to_string(m)) == m);
    CHECK_FALSE(parse_control_mode("droop"));
}

TEST_CASE("capability circle examples") {
    CHECK(clip_capability(0.0, 10.0, 10.0).q == 10.0);
    CHECK_FALSE(clip_capability(0.0, 10.0, 10.0).clipped);
    CHECK(clip_capability(10.0, 3.0, 10.0).q == 0.0);
    CHECK(clip_capability(10.0, 3.0, 10.0).clipped);
    const auto c = clip_capability(6.0, -9.0, 10.0);
    CHECK(c.q == Catch::Approx(-8.0));
    CHECK(c.clipped);
    CHECK(clip_capability(12.0, 1.0, 10.0).q == 0.0);
}

TEST_CASE("capability circle holds for random triples") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> rating_d(1e-3, 10.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 100000; ++i) {
        const double rating = rating_d(rng);
        const double p = rating * std::abs(unit(rng));
        const double q_req = 3.0 * rating * unit(rng);
        const auto c = clip_capability(p, q_req, rating);
        REQUIRE(std::hypot(p, c.q) <= rating * (1.0 + 1e-12));
        if (!c.clipped) REQUIRE(c.q == q_req);
        else REQUIRE(std::abs(c.q) < std::abs(q_req));
    }
}

TEST_CASE("thevenin law substitutions") {
    const ImpedancePair z{0.5, 1.0};
    CHECK(thevenin_dispatch(measurement(10.0), z, 0.0, kBig).q_setpoint == Catch::Approx(-5.0));
    CHECK(thevenin_dispatch(measurement(0.0), z, 3.25, kBig).q_setpoint == 3.25);
    CHECK(thevenin_dispatch(measurement(-4.0), {0.3, 0.6}, 1.0, kBig).q_setpoint == Catch::Approx(3.0));
    // at p = rating the circle forces q to zero
    const auto full = thevenin_dispatch(measurement(10.0, {}, 10.0), z, 0.0, 10.0);
    CHECK(full.q_setpoint == 0.0);
    CHECK(full.clipped);
    // substation (no impedance) leaves the setpoint alone
    CHECK(thevenin_dispatch(measurement(10.0), {0.0, 0.0}, 2.0, kBig).q_setpoint == 2.0);
}

TEST_CASE("pfm law substitutions") {
    const ImpedancePair z{0.5, 1.0};
    CHECK(pfm_dispatch(measurement(10.0), z, 0.0, kBig).q_setpoint == Catch::Approx(-5.0));
    CHECK(pfm_dispatch(measurement(0.0, {{4.0, -1.0}}), z, 0.0, kBig).q_setpoint == Catch::Approx(1.0));
    const double two = pfm_dispatch(measurement(2.0, {{1.0, 0.5}, {3.0, -0.25}}), z, 1.0, kBig).q_setpoint;
    CHECK(two == Catch::Approx(1.0 + 0.5 * (4.0 - 2.0) + 0.25));
    CHECK(pfm_dispatch(measurement(10.0), {0.0, 0.0}, 2.0, kBig).q_setpoint == 2.0);
}

TEST_CASE("pfm at a leaf equals thevenin with the local ratio") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const ImpedancePair z{std::abs(u(rng)) + 1e-3, std::abs(u(rng)) + 1e-3};
        const auto m = measurement(u(rng), {}, 0.0);
        const double prev = u(rng);
        REQUIRE(pfm_dispatch(m, z, prev, kBig).q_setpoint == thevenin_dispatch(m, z, prev, kBig).q_setpoint);
    }
}

TEST_CASE("zero input is a fixed point and an increase commands absorption") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const ImpedancePair z{u(rng), u(rng)};
        const double prev = u(rng) - 0.5;
        const auto still = measurement(0.0, {{0.0, 0.0}, {0.0, 0.0}});
        REQUIRE(thevenin_dispatch(still, z, prev, kBig).q_setpoint == prev);
        REQUIRE(pfm_dispatch(still, z, prev, kBig).q_setpoint == prev);
        const auto rise = measurement(u(rng));
        REQUIRE(thevenin_dispatch(rise, z, prev, kBig).q_setpoint < prev);
        REQUIRE(pfm_dispatch(rise, z, prev, kBig).q_setpoint < prev);
    }
}

TEST_CASE("clipped setpoints do not wind up") {
    const ImpedancePair z{1.0, 1.0};
    double q = 0.0;
    for (int k = 0; k < 50; ++k) q = thevenin_dispatch(measurement(1.0, {}, 0.6), z, q, 1.0).q_setpoint;
    CHECK(q == Catch::Approx(-0.8));
    // one opposite step moves straight off the limit
    q = thevenin_dispatch(measurement(-0.3, {}, 0.6), z, q, 1.0).q_setpoint;
    CHECK(q == Catch::Approx(-0.5));
}

TEST_CASE("thevenin impedance sums self terms along the path") {
    SECTION("two-segment chain") {
        FeederSpec s;
        s.root = "r";
        s.bases = gf_test::unit_bases();
        s.buses = {gf_test::bus("r", "A"), gf_test::bus("m", "A"), gf_test::bus("x", "A")};
        s.segments = {gf_test::segment("r", "m", "A", {0.01, 0.02}), gf_test::segment("m", "x", "A", {0.01, 0.02})};
        const Feeder f = Feeder::build(s);
        const auto z = thevenin_impedance(f, f.bus_index("x"), Phase::A);
        CHECK(z.r == Catch::Approx(0.02));
        CHECK(z.x == Catch::Approx(0.04));
        const auto root = thevenin_impedance(f, f.root(), Phase::A);
        CHECK(root.r == 0.0);
        CHECK(root.x == 0.0);
        CHECK_THROWS_AS(thevenin_impedance(f, f.bus_index("x"), Phase::B), Error);
    }
    SECTION("tree25 leaves against an explicit walk") {
        const Feeder f = gf_test::bundled("tree25_pv");
        for (const char* leaf : {"a3", "b2", "c3", "e3", "l2", "m3", "t8"}) {
            const BusIndex b = f.bus_index(leaf);
            f.bus(b).phases.for_each([&](Phase p) {
                double r = 0.0, x = 0.0;
                for (BusIndex cur = b; cur != f.root();) {
                    const Segment* up = nullptr;
                    for (const auto& seg : f.segments())
                        if (seg.to == cur) up = &seg;
                    REQUIRE(up);
                    r += up->z(p, p).real();
                    x += up->z(p, p).imag();
                    cur = up->from;
                }
                const auto z = thevenin_impedance(f, b, p);
                CHECK(z.r == Catch::Approx(r).epsilon(1e-12));
                CHECK(z.x == Catch::Approx(x).epsilon(1e-12));
                CHECK(z.x != 0.0);
            });
        }
    }
}

TEST_CASE("local controller caches per-inverter constants") {
    const Feeder f = gf_test::bundled("tree25_pv");
    const LocalController thev(f, ControlMode::thevenin);
    const LocalController pfm(f, ControlMode::pfm);
    const LocalController none(f, ControlMode::none);
    for (std::size_t k = 0; k < f.pv_units().size(); ++k) {
        const auto& u = f.pv_units()[k];
        const auto& seg = f.segment(*f.parent_segment(u.bus));
        u.phases.for_each([&](Phase p) {
            CHECK(pfm.parent_segment(k)[p].r == seg.z(p, p).real());
            CHECK(thev.thevenin(k)[p].x == Catch::Approx(thevenin_impedance(f, u.bus, p).x));
            LocalMeasurement m;
            m.bus = u.bus;
            m.phase = p;
            m.dp_inj = 0.001;
            m.child_flow_deltas.resize(f.children(u.bus).size());
            CHECK(none.dispatch(k, m, 0.002).q_setpoint == 0.002);
            CHECK(thev.dispatch(k, m, 0.0).q_setpoint < 0.0);
            CHECK(pfm.dispatch(k, m, 0.0).q_setpoint < 0.0);
        });
    }
}
