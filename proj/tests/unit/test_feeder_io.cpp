#include <catch_amalgamated.hpp>

#include <clocale>
#include <random>
#include <sstream>

#include <json.hpp>

#include "support.hpp"

using namespace gridflux;
using nlohmann::json;

namespace {

const char* kTwoBus = R"({
  "name": "mini",
  "root": "r",
  "bases": {"kva": 3000, "kv_ll": 1.7320508075688772},
  "buses": [
    {"id": "r", "phases": "AB"},
    {"id": "x", "phases": "AB", "load": {"A": [10, 2], "B": [5, 1]}}
  ],
  "segments": [
    {"from": "r", "to": "x", "phases": "AB", "length": 2,
     "impedance": [[[0.01, 0.02], [0.002, 0.004], null],
                   [[0.002, 0.004], [0.01, 0.02], null],
                   [null, null, null]]}
  ],
  "pv_units": [{"id": "p", "bus": "x", "phases": "AB", "rating_kva": 30}]
})";

std::string expect_semantic(const std::string& doc) {
    try {
        parse_feeder_spec(doc);
    } catch (const SemanticError& e) {
        return e.path();
    }
    FAIL("expected SemanticError");
    return {};
}

std::string mutate(json doc, const std::string& pointer, const json& value) {
    doc[json::json_pointer(pointer)] = value;
    return doc.dump();
}

std::string erase(json doc, const std::string& parent, const std::string& key) {
    doc[json::json_pointer(parent)].erase(key);
    return doc.dump();
}

}  // namespace

TEST_CASE("bundled twobus parses to two buses and one segment") {
    const Feeder f = gf_test::bundled("twobus");
    CHECK(f.num_buses() == 2);
    CHECK(f.segments().size() == 1);
}

TEST_CASE("bundled ieee13_like has mixed laterals and a sane profile") {
    const Feeder f = gf_test::bundled("ieee13_like");
    bool one = false, two = false, three = false;
    for (const auto& b : f.buses()) {
        one |= b.phases.size() == 1;
        two |= b.phases.size() == 2;
        three |= b.phases.size() == 3;
    }
    CHECK((one && two && three));
}

TEST_CASE("inline document parses with per-unit conversion") {
    const Feeder f = parse_feeder(kTwoBus);
    CHECK(f.name() == "mini");
    const auto& seg = f.segment(0);
    CHECK(std::abs(seg.z(Phase::A, Phase::A) - Complex(0.02, 0.04)) < 1e-15);
    CHECK(seg.z(Phase::A, Phase::B).real() == Catch::Approx(0.004));
    CHECK(seg.z(Phase::C, Phase::C) == Complex(0.0, 0.0));
    CHECK(f.bus(f.bus_index("x")).load[Phase::B] == Complex(0.005, 0.001));
    CHECK(f.pv_units()[0].rating == Catch::Approx(0.015));
}

TEST_CASE("feeder documents round trip") {
    for (auto name : gf_test::kFixtures) {
        INFO(name);
        const Feeder f = gf_test::bundled(name);
        const std::string once = write_feeder(f.spec());
        const FeederSpec back = parse_feeder_spec(once);
        CHECK(write_feeder(back) == once);
        const Feeder g = Feeder::build(back);
        REQUIRE(g.num_buses() == f.num_buses());
        CHECK(g.v_source() == f.v_source());
        for (std::size_t s = 0; s < f.segments().size(); ++s)
            for (Phase r : kAllPhases)
                for (Phase c : kAllPhases) CHECK(std::abs(g.segment(s).z(r, c) - f.segment(s).z(r, c)) < 1e-12);
    }
}

TEST_CASE("source voltage is optional and round trips") {
    json doc = json::parse(kTwoBus);
    CHECK(parse_feeder(doc.dump()).v_source() == 1.0);
    doc["v_source_pu"] = 1.03;
    const Feeder f = parse_feeder(doc.dump());
    CHECK(f.v_source() == 1.03);
    CHECK(write_feeder(f.spec()).find("v_source_pu") != std::string::npos);
    CHECK(expect_semantic(mutate(doc, "/v_source_pu", "high")) == "/v_source_pu");
    doc["v_source_pu"] = 2.0;
    CHECK_THROWS_AS(parse_feeder(doc.dump()), ValidationError);
}

TEST_CASE("syntax errors carry line and column") {
    const std::string doc = "{\n  \"root\": \"r\",\n  \"bases\": {\"kva\": 3000,, }\n}";
    try {
        parse_feeder_spec(doc);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 25);
    }
}

TEST_CASE("semantic errors name the JSON path") {
    const json doc = json::parse(kTwoBus);
    CHECK(expect_semantic(mutate(doc, "/segments/0/to", "ghost")) == "/segments/0/to");
    CHECK(expect_semantic(mutate(doc, "/pv_units/0/bus", "ghost")) == "/pv_units/0/bus");
    CHECK(expect_semantic(mutate(doc, "/root", "ghost")) == "/root");
    CHECK(expect_semantic(mutate(doc, "/buses/1/colour", "red")) == "/buses/1/colour");
    CHECK(expect_semantic(mutate(doc, "/segmnets", json::array())) == "/segmnets");
    CHECK(expect_semantic(erase(doc, "/bases", "kva")) == "/bases/kva");
    CHECK(expect_semantic(mutate(doc, "/buses/1/phases", "AX")) == "/buses/1/phases");
    CHECK(expect_semantic(mutate(doc, "/buses/1/load/D", json::array({1, 1}))) == "/buses/1/load/D");
    CHECK(expect_semantic(mutate(doc, "/buses/1/load/A", json::array({1}))) == "/buses/1/load/A");
    CHECK(expect_semantic(mutate(doc, "/segments/0/impedance/0/1", nullptr)) == "/segments/0/impedance/0/1");
    CHECK(expect_semantic(mutate(doc, "/segments/0/impedance/2/2", json::array({0.1, 0.2}))) ==
          "/segments/0/impedance/2/2");
    CHECK(expect_semantic(mutate(doc, "/segments/0/impedance/1", json::array({nullptr}))) ==
          "/segments/0/impedance/1");
    CHECK(expect_semantic(mutate(doc, "/segments/0/length", "long")) == "/segments/0/length");
    CHECK(expect_semantic(mutate(doc, "/pv_units/0/rating_kva", "big")) == "/pv_units/0/rating_kva");
    CHECK(expect_semantic(mutate(doc, "/buses", json::object())) == "/buses");
}

TEST_CASE("corrupted topologies surface as validation errors") {
    const json doc = json::parse(kTwoBus);
    SECTION("cycle") {
        json d = doc;
        d["segments"].push_back(d["segments"][0]);
        d["segments"][1]["from"] = "x";
        d["segments"][1]["to"] = "r";
        CHECK_THROWS_AS(parse_feeder(d.dump()), ValidationError);
    }
    SECTION("orphan") {
        json d = doc;
        d["buses"].push_back({{"id", "y"}, {"phases", "A"}});
        CHECK_THROWS_AS(parse_feeder(d.dump()), ValidationError);
    }
    SECTION("phase mismatch") {
        CHECK_THROWS_AS(parse_feeder(mutate(doc, "/buses/0/phases", "A")), ValidationError);
    }
    SECTION("zero reactance") {
        CHECK_THROWS_AS(parse_feeder(mutate(doc, "/segments/0/impedance/1/1", json::array({0.01, 0.0}))),
                        ValidationError);
    }
}

TEST_CASE("parser survives a corruption corpus without crashing") {
    // Every mutation must either parse cleanly or fail with a library error.
    std::vector<std::string> corpus;
    for (auto name : gf_test::kFixtures) corpus.push_back(read_text_file(gf_test::feeder_path(name)));
    corpus.emplace_back(kTwoBus);

    std::mt19937_64 rng(20240611);
    const std::string junk = "{}[],:\"0123456789.-eE nulltruefalse\\\n";
    std::size_t rejected = 0;
    std::size_t total = 0;
    for (const auto& base : corpus) {
        for (int trial = 0; trial < 400; ++trial) {
            std::string doc = base;
            const int edits = 1 + static_cast<int>(rng() % 4);
            for (int e = 0; e < edits && !doc.empty(); ++e) {
                const std::size_t at = rng() % doc.size();
                switch (rng() % 4) {
                case 0: doc.erase(at, 1 + rng() % 8); break;
                case 1: doc.insert(at, 1, junk[rng() % junk.size()]); break;
                case 2: doc[at] = junk[rng() % junk.size()]; break;
                default: doc.resize(at); break;
                }
            }
            ++total;
            try {
                (void)parse_feeder(doc);
            } catch (const Error&) {
                ++rejected;
            } catch (const std::exception& e) {
                FAIL("non-library exception: " << e.what());
            }
        }
    }
    CHECK(rejected > total / 2);
}

TEST_CASE("structural mutations of bundled feeders are rejected") {
    std::mt19937_64 rng(99);
    const json base = json::parse(read_text_file(gf_test::feeder_path("tree25_pv")));
    const std::size_t n_seg = base["segments"].size();
    const std::size_t n_bus = base["buses"].size();
    for (int trial = 0; trial < 200; ++trial) {
        json d = base;
        const std::size_t s = rng() % n_seg;
        const std::size_t b = rng() % n_bus;
        switch (trial % 6) {
        case 0: d["segments"][s]["to"] = d["root"]; break;
        case 1: d["segments"].erase(s); break;
        case 2: d["segments"].push_back(d["segments"][s]); break;
        case 3: d["segments"][s]["impedance"][0][0] = json::array({0.1, 0.0}); break;
        case 4: d["buses"][b]["phases"] = "Q"; break;
        default: d["segments"][s]["length"] = -1.0; break;
        }
        INFO("trial " << trial);
        CHECK_THROWS_AS(parse_feeder(d.dump()), Error);
    }
}

TEST_CASE("profile tables") {
    SECTION("three rows, one series") {
        const auto t = parse_profiles("t_min,load\n0,1.0\n1,0.9\n2,0.8\n");
        CHECK(t.size() == 3);
        CHECK(t.series("load") == std::vector<double>{1.0, 0.9, 0.8});
        CHECK(t.step() == 1.0);
        CHECK(t.contains("load"));
        CHECK_THROWS_AS(t.series("pv"), Error);
    }
    SECTION("full day spans 24 hours") {
        std::ostringstream csv;
        csv << "# synthetic day\nt_min,load\n";
        for (int m = 0; m < 1440; ++m) csv << m << ",1\n";
        const auto t = parse_profiles(csv.str());
        CHECK(t.size() == 1440);
        CHECK(t.t_min.back() - t.t_min.front() + t.step() == 1440.0);
    }
    SECTION("rejections") {
        CHECK_THROWS_AS(parse_profiles("t_min,load\n0,1\n2,1\n1,1\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles("t_min,load\n0,1\n0,1\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles("t_min,load\n0,1\n1,1\n3,1\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles("t_min,load\n0,1,2\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles("t_min,load\n0,abc\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles("t_min,load\n0,-1\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles("time,load\n0,1\n"), ParseError);
        CHECK_THROWS_AS(parse_profiles(""), ParseError);
    }
    SECTION("bad cell position is reported") {
        try {
            parse_profiles("t_min,a,b\n0,1,1\n1,1,x\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            CHECK(e.column() == 3);
        }
    }
    SECTION("write then parse") {
        ProfileTable t;
        t.t_min = {0, 5, 10};
        t.names = {"a", "b"};
        t.columns = {{0.1234567, 1.0, 2.5}, {0.0, 3.25, 1e-7}};
        std::ostringstream out;
        write_profiles(t, out);
        const auto back = parse_profiles(out.str());
        REQUIRE(back.size() == 3);
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t r = 0; r < 3; ++r) CHECK(std::abs(back.columns[k][r] - t.columns[k][r]) <= 5e-7);
    }
}

TEST_CASE("fixed six-decimal formatting ignores the locale") {
    CHECK(format_fixed6(1.0) == "1.000000");
    CHECK(format_fixed6(-0.0) == "0.000000");
    CHECK(format_fixed6(-1e-9) == "0.000000");
    CHECK(format_fixed6(2.0 / 3.0) == "0.666667");
    CHECK(format_fixed6(-2.5) == "-2.500000");
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) {
        CHECK(format_fixed6(1.5) == "1.500000");
        CHECK(parse_profiles("t_min,a\n0,1.5\n1,2.5\n").series("a")[0] == 1.5);
        std::setlocale(LC_NUMERIC, "C");
    }
}
