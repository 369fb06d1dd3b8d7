#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "gridflux/feeder.hpp"
#include "gridflux/feeder_io.hpp"

namespace gf_test {

inline std::filesystem::path feeder_path(std::string_view name) {
    return std::filesystem::path(GRIDFLUX_FEEDER_DIR) / (std::string(name) + ".json");
}

inline gridflux::Feeder bundled(std::string_view name) { return gridflux::load_feeder(feeder_path(name)); }

inline std::shared_ptr<const gridflux::Feeder> bundled_ptr(std::string_view name) {
    return std::make_shared<const gridflux::Feeder>(bundled(name));
}

inline constexpr std::string_view kFixtures[] = {"twobus", "chain5", "ieee13_like", "tree25_pv"};

// With kva = 3000 and kv_ll = sqrt(3) the impedance base is 1 ohm and the
// per-phase power base is 1000 kVA, so ohms read as pu and kW / 1000 as pu.
inline gridflux::Bases unit_bases() { return {3000.0, std::sqrt(3.0), {}}; }

inline gridflux::BusSpec bus(std::string id, std::string_view phases) {
    gridflux::BusSpec b;
    b.id = std::move(id);
    b.phases = *gridflux::PhaseSet::parse(phases);
    return b;
}

inline gridflux::BusSpec loaded_bus(std::string id, std::string_view phases, gridflux::Complex kva_per_phase) {
    auto b = bus(std::move(id), phases);
    b.phases.for_each([&](gridflux::Phase p) {
        b.load[p] = kva_per_phase;
        b.load_phases.insert(p);
    });
    return b;
}

/// Segment with the same self impedance on every present phase and `mutual` between them.
inline gridflux::SegmentSpec segment(std::string from, std::string to, std::string_view phases, gridflux::Complex self,
                                     gridflux::Complex mutual = {}) {
    gridflux::SegmentSpec s;
    s.from = std::move(from);
    s.to = std::move(to);
    s.phases = *gridflux::PhaseSet::parse(phases);
    s.phases.for_each([&](gridflux::Phase r) {
        s.phases.for_each([&](gridflux::Phase c) { s.impedance(r, c) = r == c ? self : mutual; });
    });
    return s;
}

inline gridflux::PvSpec pv(std::string id, std::string bus_id, std::string_view phases, double kva) {
    gridflux::PvSpec u;
    u.id = std::move(id);
    u.bus = std::move(bus_id);
    u.phases = *gridflux::PhaseSet::parse(phases);
    u.rating_kva = kva;
    return u;
}

}  // namespace gf_test
