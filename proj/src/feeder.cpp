#include "gridflux/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

namespace gridflux {

namespace {

std::string segment_name(const SegmentSpec& s) { return s.from + "->" + s.to; }

double zone_kv(const Bases& bases, const std::string& zone) {
    if (zone.empty()) return bases.kv_ll;
    auto it = bases.zones.find(zone);
    return it == bases.zones.end() ? 0.0 : it->second;
}

}  // namespace

std::string to_string(Violation::Kind kind) {
    using K = Violation::Kind;
    switch (kind) {
    case K::bad_bases: return "bad bases";
    case K::bad_source: return "bad source voltage";
    case K::missing_root: return "missing root";
    case K::duplicate_bus: return "duplicate bus";
    case K::empty_phases: return "empty phases";
    case K::load_phase: return "load on absent phase";
    case K::unknown_zone: return "unknown zone";
    case K::unknown_bus: return "unknown bus";
    case K::not_a_tree: return "not a tree";
    case K::orphan: return "orphan bus";
    case K::phase_mismatch: return "phase mismatch";
    case K::zero_reactance: return "zero reactance";
    case K::bad_length: return "bad length";
    case K::zone_mismatch: return "zone mismatch";
    case K::bad_rating: return "bad rating";
    case K::duplicate_pv: return "duplicate pv";
    }
    return "unknown";
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error([&] {
          std::string msg = "feeder validation failed:";
          for (const auto& v : violations) msg += "\n  " + to_string(v.kind) + " [" + v.subject + "]: " + v.message;
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<Violation> validate(const FeederSpec& spec) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    auto add = [&](K kind, std::string subject, std::string message) {
        out.push_back({kind, std::move(subject), std::move(message)});
    };

    if (!(spec.bases.kva > 0.0) || !(spec.bases.kv_ll > 0.0))
        add(K::bad_bases, "bases", "kva and kv_ll must be positive");
    if (!(spec.v_source_pu >= 0.8 && spec.v_source_pu <= 1.2))
        add(K::bad_source, "v_source_pu", "source voltage must lie in [0.8, 1.2] pu");
    for (const auto& [zone, kv] : spec.bases.zones)
        if (!(kv > 0.0)) add(K::bad_bases, "zone " + zone, "kv_ll must be positive");

    std::unordered_map<std::string, std::size_t> bus_pos;
    for (std::size_t i = 0; i < spec.buses.size(); ++i) {
        const auto& b = spec.buses[i];
        if (!bus_pos.emplace(b.id, i).second) add(K::duplicate_bus, b.id, "bus id appears more than once");
        if (b.phases.empty()) add(K::empty_phases, b.id, "bus has no phases");
        if (!b.load_phases.subset_of(b.phases))
            add(K::load_phase, b.id, "load given on phases " + b.load_phases.to_string() + " but bus has " + b.phases.to_string());
        if (!b.zone.empty() && !spec.bases.zones.contains(b.zone))
            add(K::unknown_zone, b.id, "zone '" + b.zone + "' is not declared in bases");
    }

    if (spec.root.empty() || !bus_pos.contains(spec.root))
        add(K::missing_root, spec.root.empty() ? "root" : spec.root, "root bus is not defined");

    // Topology over the segments whose endpoints resolve.
    std::unordered_map<std::string, std::vector<std::string>> downstream;
    std::unordered_map<std::string, std::string> parent_of;
    std::size_t valid_edges = 0;
    for (const auto& s : spec.segments) {
        const std::string name = segment_name(s);
        bool endpoints_ok = true;
        for (const auto* end : {&s.from, &s.to}) {
            if (!bus_pos.contains(*end)) {
                add(K::unknown_bus, name, "segment references unknown bus '" + *end + "'");
                endpoints_ok = false;
            }
        }
        if (s.phases.empty()) add(K::empty_phases, name, "segment has no phases");
        if (!(s.length > 0.0) || !std::isfinite(s.length)) add(K::bad_length, name, "length must be positive");
        s.phases.for_each([&](Phase p) {
            if (s.impedance(p, p).imag() == 0.0)
                add(K::zero_reactance, name, std::string("phase ") + to_char(p) + " self reactance is zero");
        });
        if (!endpoints_ok) continue;

        const auto& from = spec.buses[bus_pos[s.from]];
        const auto& to = spec.buses[bus_pos[s.to]];
        if (!to.phases.subset_of(s.phases) || !s.phases.subset_of(from.phases))
            add(K::phase_mismatch, name,
                "phases must nest: to " + to.phases.to_string() + " within segment " + s.phases.to_string() +
                    " within from " + from.phases.to_string());
        if (zone_kv(spec.bases, from.zone) != zone_kv(spec.bases, to.zone))
            add(K::zone_mismatch, name, "segment joins different voltage zones (transformers are not modeled)");

        ++valid_edges;
        downstream[s.from].push_back(s.to);
        if (s.to == spec.root) {
            add(K::not_a_tree, name, "segment feeds the root bus");
        } else if (auto [it, fresh] = parent_of.emplace(s.to, s.from); !fresh) {
            add(K::not_a_tree, s.to, "bus has more than one parent (" + it->second + ", " + s.from + ")");
        }
    }

    const std::size_t n_unique = bus_pos.size();
    if (n_unique > 0 && valid_edges != n_unique - 1)
        add(K::not_a_tree, "segments",
            "expected " + std::to_string(n_unique - 1) + " segments for " + std::to_string(n_unique) + " buses, found " +
                std::to_string(valid_edges));

    if (bus_pos.contains(spec.root)) {
        std::set<std::string> seen{spec.root};
        std::deque<std::string> queue{spec.root};
        bool cycle = false;
        while (!queue.empty()) {
            auto cur = queue.front();
            queue.pop_front();
            for (const auto& next : downstream[cur]) {
                if (!seen.insert(next).second) {
                    cycle = true;
                    continue;
                }
                queue.push_back(next);
            }
        }
        if (cycle) add(K::not_a_tree, spec.root, "cycle reachable from the root");
        std::set<std::string> ids;
        for (const auto& b : spec.buses) ids.insert(b.id);
        for (const auto& id : ids) {
            if (seen.contains(id)) continue;
            // walk parents to distinguish a detached loop from a plain orphan
            std::set<std::string> walk{id};
            std::string cur = id;
            bool loops = false;
            while (parent_of.contains(cur)) {
                cur = parent_of[cur];
                if (!walk.insert(cur).second) {
                    loops = true;
                    break;
                }
            }
            if (loops) add(K::not_a_tree, id, "bus lies on a cycle detached from the root");
            add(K::orphan, id, "bus is not reachable from the root");
        }
    }

    std::set<std::string> pv_ids;
    std::set<std::string> pv_buses;
    for (const auto& pv : spec.pv_units) {
        if (!pv_ids.insert(pv.id).second) add(K::duplicate_pv, pv.id, "pv id appears more than once");
        if (!(pv.rating_kva > 0.0) || !std::isfinite(pv.rating_kva)) add(K::bad_rating, pv.id, "rating_kva must be positive");
        if (pv.p_max_kw && (!(*pv.p_max_kw > 0.0) || *pv.p_max_kw > pv.rating_kva))
            add(K::bad_rating, pv.id, "p_max_kw must lie in (0, rating_kva]");
        if (pv.phases.empty()) add(K::empty_phases, pv.id, "pv unit has no phases");
        auto it = bus_pos.find(pv.bus);
        if (it == bus_pos.end()) {
            add(K::unknown_bus, pv.id, "pv unit references unknown bus '" + pv.bus + "'");
            continue;
        }
        if (!pv.phases.subset_of(spec.buses[it->second].phases))
            add(K::phase_mismatch, pv.id, "pv phases " + pv.phases.to_string() + " not present at bus " + pv.bus);
        if (!pv_buses.insert(pv.bus).second) add(K::duplicate_pv, pv.id, "bus " + pv.bus + " already hosts a pv unit");
    }
    return out;
}

Feeder Feeder::build(FeederSpec spec) {
    if (auto violations = validate(spec); !violations.empty()) throw ValidationError(std::move(violations));

    Feeder f;
    f.spec_ = std::move(spec);
    const auto& sp = f.spec_;
    const double s_phase_kva = sp.bases.kva / 3.0;

    std::vector<std::size_t> by_id(sp.buses.size());
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return sp.buses[a].id < sp.buses[b].id; });

    std::vector<double> z_base(sp.buses.size());
    for (std::size_t i : by_id) {
        const auto& b = sp.buses[i];
        const double kv = zone_kv(sp.bases, b.zone);
        Bus bus;
        bus.id = b.id;
        bus.phases = b.phases;
        bus.v_base_ln = kv * 1000.0 / std::sqrt(3.0);
        b.phases.for_each([&](Phase p) { bus.load[p] = b.load[p] / s_phase_kva; });
        f.index_.emplace(b.id, f.buses_.size());
        z_base[f.buses_.size()] = kv * kv * 1000.0 / sp.bases.kva;  // (kV_ll)^2 / MVA, ohms
        f.buses_.push_back(std::move(bus));
    }
    f.root_ = f.index_.at(sp.root);

    const std::size_t n = f.buses_.size();
    f.children_.assign(n, {});
    f.child_segments_.assign(n, {});
    f.parent_segment_.assign(n, static_cast<SegmentIndex>(-1));
    f.depth_.assign(n, 0);
    f.pv_at_.assign(n, static_cast<std::size_t>(-1));

    // segments sorted by receiving-bus id
    std::vector<const SegmentSpec*> segs;
    for (const auto& s : sp.segments) segs.push_back(&s);
    std::sort(segs.begin(), segs.end(), [&](auto* a, auto* b) { return f.index_.at(a->to) < f.index_.at(b->to); });
    for (const auto* s : segs) {
        Segment seg;
        seg.from = f.index_.at(s->from);
        seg.to = f.index_.at(s->to);
        seg.phases = s->phases;
        const double zb = z_base[seg.from];
        s->phases.for_each([&](Phase r) {
            s->phases.for_each([&](Phase c) { seg.z(r, c) = s->impedance(r, c) * s->length / zb; });
        });
        f.parent_segment_[seg.to] = f.segments_.size();
        f.segments_.push_back(seg);
    }
    for (SegmentIndex si = 0; si < f.segments_.size(); ++si) {
        const auto& seg = f.segments_[si];
        f.children_[seg.from].push_back(seg.to);
        f.child_segments_[seg.from].push_back(si);
    }
    // children were appended in receiving-bus index order, which is id order

    std::deque<BusIndex> queue{f.root_};
    while (!queue.empty()) {
        BusIndex b = queue.front();
        queue.pop_front();
        f.order_.push_back(b);
        for (BusIndex c : f.children_[b]) {
            f.depth_[c] = f.depth_[b] + 1;
            queue.push_back(c);
        }
    }

    for (const auto& pv : sp.pv_units) {
        PvUnit u;
        u.id = pv.id;
        u.bus = f.index_.at(pv.bus);
        u.phases = pv.phases;
        const double per_phase = static_cast<double>(pv.phases.size()) * s_phase_kva;
        u.rating = pv.rating_kva / per_phase;
        u.p_max = pv.p_max_kw.value_or(pv.rating_kva) / per_phase;
        f.pv_at_[u.bus] = f.pv_.size();
        f.pv_.push_back(std::move(u));
    }
    return f;
}

BusIndex Feeder::bus_index(std::string_view id) const {
    if (auto b = find_bus(id)) return *b;
    throw Error("unknown bus '" + std::string(id) + "'");
}

std::optional<BusIndex> Feeder::find_bus(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Feeder::children(std::string_view id) const {
    std::vector<std::string> out;
    for (BusIndex c : children(bus_index(id))) out.push_back(buses_[c].id);
    return out;
}

std::optional<SegmentIndex> Feeder::parent_segment(BusIndex b) const {
    SegmentIndex s = parent_segment_.at(b);
    if (s == static_cast<SegmentIndex>(-1)) return std::nullopt;
    return s;
}

std::vector<SegmentIndex> Feeder::path_to_root(BusIndex b) const {
    std::vector<SegmentIndex> path;
    for (auto s = parent_segment(b); s; s = parent_segment(segments_[*s].from)) path.push_back(*s);
    std::reverse(path.begin(), path.end());
    return path;
}

std::optional<std::size_t> Feeder::pv_at(BusIndex b) const {
    std::size_t i = pv_at_.at(b);
    if (i == static_cast<std::size_t>(-1)) return std::nullopt;
    return i;
}

}  // namespace gridflux
