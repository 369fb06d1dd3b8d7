#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridflux/types.hpp"

namespace gridflux {

// ---------------------------------------------------------------------------
// Physical-unit description, as read from a feeder file. May be invalid;
// validate() reports everything wrong with it.
// ---------------------------------------------------------------------------

struct Bases {
    double kva = 0.0;    // three-phase base power
    double kv_ll = 0.0;  // line-to-line base voltage of the default zone
    std::map<std::string, double> zones;  // extra zones: name -> kv_ll
};

struct BusSpec {
    std::string id;
    PhaseSet phases;
    std::string zone;          // empty = default zone
    PhaseArray<Complex> load;  // constant-power demand, kW + j kvar per phase
    PhaseSet load_phases;      // phases that carry a load entry
};

struct SegmentSpec {
    std::string from;
    std::string to;
    PhaseSet phases;
    PhaseMatrix impedance;  // ohms per unit length; entries outside `phases` are ignored
    double length = 1.0;
};

struct PvSpec {
    std::string id;
    std::string bus;
    PhaseSet phases;
    double rating_kva = 0.0;          // total inverter rating, split equally across phases
    std::optional<double> p_max_kw;   // total active output at full irradiance; defaults to rating
};

struct FeederSpec {
    std::string name;
    std::string root;
    Bases bases;
    double v_source_pu = 1.0;  // substation voltage setpoint, stands in for an unmodeled regulator
    std::vector<BusSpec> buses;
    std::vector<SegmentSpec> segments;
    std::vector<PvSpec> pv_units;
};

struct Violation {
    enum class Kind {
        bad_bases,
        bad_source,
        missing_root,
        duplicate_bus,
        empty_phases,
        load_phase,
        unknown_zone,
        unknown_bus,
        not_a_tree,
        orphan,
        phase_mismatch,
        zero_reactance,
        bad_length,
        zone_mismatch,
        bad_rating,
        duplicate_pv,
    };
    Kind kind;
    std::string subject;
    std::string message;
};

/// Checks every structural invariant and returns all violations found.
std::vector<Violation> validate(const FeederSpec& spec);

class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

  private:
    std::vector<Violation> violations_;
};

// ---------------------------------------------------------------------------
// Validated, per-unit feeder. Immutable once built.
// ---------------------------------------------------------------------------

struct Bus {
    std::string id;
    PhaseSet phases;
    PhaseArray<Complex> load;  // pu demand
    double v_base_ln = 0.0;    // volts
};

struct Segment {
    BusIndex from = kNoBus;
    BusIndex to = kNoBus;
    PhaseSet phases;
    PhaseMatrix z;  // pu, total for the segment; zero outside `phases`
};

struct PvUnit {
    std::string id;
    BusIndex bus = kNoBus;
    PhaseSet phases;
    double rating = 0.0;  // pu apparent power per phase
    double p_max = 0.0;   // pu active power per phase at normalized output 1
};

class Feeder {
  public:
    /// Validates and converts to per-unit. Throws ValidationError.
    static Feeder build(FeederSpec spec);

    const FeederSpec& spec() const noexcept { return spec_; }
    const std::string& name() const noexcept { return spec_.name; }

    std::span<const Bus> buses() const noexcept { return buses_; }
    std::span<const Segment> segments() const noexcept { return segments_; }
    std::span<const PvUnit> pv_units() const noexcept { return pv_; }
    const Bus& bus(BusIndex b) const { return buses_.at(b); }
    const Segment& segment(SegmentIndex s) const { return segments_.at(s); }
    std::size_t num_buses() const noexcept { return buses_.size(); }

    BusIndex root() const noexcept { return root_; }
    BusIndex bus_index(std::string_view id) const;  // throws Error for unknown ids
    std::optional<BusIndex> find_bus(std::string_view id) const;

    /// Buses fed directly from `b`, sorted by id.
    std::span<const BusIndex> children(BusIndex b) const { return children_.at(b); }
    std::vector<std::string> children(std::string_view id) const;
    /// Segments leaving `b`, in the same order as children(b).
    std::span<const SegmentIndex> child_segments(BusIndex b) const { return child_segments_.at(b); }

    std::optional<SegmentIndex> parent_segment(BusIndex b) const;
    /// Segments from the substation down to `b`; empty for the root.
    std::vector<SegmentIndex> path_to_root(BusIndex b) const;
    std::vector<SegmentIndex> path_to_root(std::string_view id) const { return path_to_root(bus_index(id)); }
    std::size_t depth(BusIndex b) const { return depth_.at(b); }

    /// Root first, parents before children, siblings by id.
    std::span<const BusIndex> topological_order() const noexcept { return order_; }

    std::optional<std::size_t> pv_at(BusIndex b) const;

    double v_source() const noexcept { return spec_.v_source_pu; }
    double base_kva_per_phase() const noexcept { return spec_.bases.kva / 3.0; }
    double kw_to_pu(double kw) const noexcept { return kw / base_kva_per_phase(); }
    double pu_to_kw(double pu) const noexcept { return pu * base_kva_per_phase(); }

  private:
    Feeder() = default;

    FeederSpec spec_;
    std::vector<Bus> buses_;
    std::vector<Segment> segments_;
    std::vector<PvUnit> pv_;
    std::unordered_map<std::string, BusIndex> index_;
    std::vector<std::vector<BusIndex>> children_;
    std::vector<std::vector<SegmentIndex>> child_segments_;
    std::vector<SegmentIndex> parent_segment_;
    std::vector<std::size_t> depth_;
    std::vector<BusIndex> order_;
    std::vector<std::size_t> pv_at_;
    BusIndex root_ = kNoBus;
};

std::string to_string(Violation::Kind kind);

}  // namespace gridflux
