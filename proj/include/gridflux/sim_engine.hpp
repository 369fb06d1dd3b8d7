#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridflux/control.hpp"
#include "gridflux/feeder.hpp"
#include "gridflux/metrics.hpp"
#include "gridflux/pv_profiles.hpp"

namespace gridflux {

enum class ViolationPreset { none, overvoltage, undervoltage };

std::string_view to_string(ViolationPreset preset);
std::optional<ViolationPreset> parse_violation_preset(std::string_view text);

/// When child-segment flow changes are observed relative to the dispatch.
enum class MeasurementTiming {
    /// Dispatch at t sees child-flow changes between the solves at t-1 and t-2.
    lagged,
    /// Inverters settle within the interval: dispatch is repeated against the
    /// flows produced by the current step's downstream setpoints until it stops changing.
    settled,
};

std::string_view to_string(MeasurementTiming timing);

/// User-level knobs; make_scenario turns them into concrete input series.
struct ScenarioConfig {
    ControlMode control = ControlMode::none;
    double variability = 0.0;
    std::uint64_t seed = 0;
    std::size_t steps = 1440;
    std::optional<double> start_min;  // default: centred on solar noon, or 0 for a whole day
    std::optional<double> v_substation;  // default: the feeder's source setpoint
    bool correlated_pv = false;
    PvProfileSpec pv_profile{};         // variability and seed fields are ignored
    std::vector<double> load_profile;  // per-step multipliers; empty means flat
    double load_scale = 1.0;
    MeasurementTiming timing = MeasurementTiming::settled;
    bool include_load_in_dp = false;
    VoltageBand band{};
    std::size_t savfi_window = 15;
    double tolerance = 1e-8;
    int max_iterations = 100;
    bool warm_start = true;
};

struct Scenario {
    std::shared_ptr<const Feeder> feeder;
    ControlMode control = ControlMode::none;
    ViolationPreset preset = ViolationPreset::none;
    std::uint64_t seed = 0;
    double variability = 0.0;
    std::vector<double> t_min;                    // one entry per step
    std::vector<double> load_multiplier;          // one entry per step
    std::vector<std::vector<double>> pv_output;   // [pv][step], normalized to p_max
    double v_substation = 1.0;
    MeasurementTiming timing = MeasurementTiming::settled;
    bool include_load_in_dp = false;
    VoltageBand band{};
    std::size_t savfi_window = 15;
    double tolerance = 1e-8;
    int max_iterations = 100;
    bool warm_start = true;
    bool record_measurements = true;  // off for large sweeps

    std::size_t steps() const noexcept { return t_min.size(); }
};

/// Throws Error if the scenario is inconsistent (horizon < 2, series lengths, bad band).
void check(const Scenario& scenario);

Scenario make_scenario(std::shared_ptr<const Feeder> feeder, const ScenarioConfig& config);

/// Builds an over- or under-voltage event scenario around solar noon. The
/// load and forecast scales are adjusted by a bounded search (at most 20
/// nonlinear solves) until the uncontrolled event crosses the band; throws
/// Error when the feeder cannot be driven there.
Scenario make_violation_scenario(std::shared_ptr<const Feeder> feeder, ViolationPreset kind, const ScenarioConfig& config);

struct SeriesKey {
    BusIndex bus = kNoBus;
    Phase phase = Phase::A;
};

struct MetricsReport {
    std::size_t window = 15;
    std::vector<SeriesKey> keys;                     // every (bus, phase), bus order then phase order
    std::vector<std::vector<SavfiWindow>> savfi;     // per key
    std::vector<ViolationSummary> violations;        // per key
    std::size_t violation_count() const;
    double max_voltage = 0.0;
    double min_voltage = 0.0;
};

struct ScenarioResult {
    std::string feeder_name;
    ControlMode control = ControlMode::none;
    ViolationPreset preset = ViolationPreset::none;
    MeasurementTiming timing = MeasurementTiming::settled;
    std::uint64_t seed = 0;
    double variability = 0.0;
    double base_kva_per_phase = 0.0;

    std::vector<std::string> bus_ids;
    std::vector<PhaseSet> bus_phases;
    std::vector<std::size_t> bus_depth;
    std::vector<BusIndex> pv_bus;

    std::vector<double> t_min;
    std::vector<std::vector<PhaseArray<double>>> v_mag;  // [step][bus], pu
    std::vector<std::vector<PhaseArray<double>>> pv_p;   // [step][pv], pu
    std::vector<std::vector<ControlDispatch>> dispatch;  // [step][pv]
    std::vector<std::vector<std::vector<LocalMeasurement>>> measurements;  // [step][pv][phase slot], if recorded
    std::vector<int> iterations;                          // sweeps per step

    bool degraded = false;
    std::vector<std::size_t> degraded_steps;

    MetricsReport metrics;

    std::vector<double> voltage_series(BusIndex bus, Phase phase) const;
};

/// Observation hooks for audits; all optional.
struct EngineProbe {
    /// Called whenever inverter `pv` reads a measurement record; `record_bus` is the bus the record belongs to.
    std::function<void(std::size_t pv, BusIndex record_bus)> on_measurement_read;
};

ScenarioResult run(const Scenario& scenario, const EngineProbe* probe = nullptr);

MetricsReport compute_metrics(const ScenarioResult& result, std::size_t window, VoltageBand band);

}  // namespace gridflux
