#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "gridflux/feeder.hpp"

namespace gridflux {

enum class ControlMode { none, thevenin, pfm };

std::string_view to_string(ControlMode mode);
std::optional<ControlMode> parse_control_mode(std::string_view text);

struct FlowDelta {
    double dp = 0.0;  // pu
    double dq = 0.0;  // pu
};

/// Everything one inverter phase may observe. Never carries another bus's data.
struct LocalMeasurement {
    BusIndex bus = kNoBus;
    Phase phase = Phase::A;
    double dp_inj = 0.0;                      // change in own active output since last interval, pu
    std::vector<FlowDelta> child_flow_deltas;  // one per child segment of `bus`, in children() order
    double p_inj_now = 0.0;                   // own active output now, pu
};

struct ImpedancePair {
    double r = 0.0;
    double x = 0.0;
};

struct TheveninImpedance {
    BusIndex bus = kNoBus;
    PhaseArray<ImpedancePair> z;  // sum of self impedances along the path from the substation
};

struct PhaseDispatch {
    double q_setpoint = 0.0;  // pu, reactive injection for the next interval
    bool clipped = false;
};

struct ControlDispatch {
    BusIndex bus = kNoBus;
    PhaseArray<PhaseDispatch> phases;
};

struct Capability {
    double q = 0.0;
    bool clipped = false;
};

/// Limits q so that |p + jq| <= rating.
Capability clip_capability(double p_inj, double q_requested, double rating);

/// Series self impedance summed over path_to_root(bus). The root gives (0, 0).
TheveninImpedance thevenin_impedance(const Feeder& feeder, BusIndex bus);
ImpedancePair thevenin_impedance(const Feeder& feeder, BusIndex bus, Phase phase);

/// dq = -(R/X) dp_inj. A zero X (the substation bus) leaves the setpoint unchanged.
PhaseDispatch thevenin_dispatch(const LocalMeasurement& m, ImpedancePair thevenin, double prev_q, double rating);

/// Holds the parent segment's voltage drop constant:
/// dq = (r/x) (sum_k dP_jk - dp_inj) + sum_k dQ_jk over the child segments.
PhaseDispatch pfm_dispatch(const LocalMeasurement& m, ImpedancePair parent_segment, double prev_q, double rating);

/// Static per-inverter constants for one strategy, fixed at construction.
class LocalController {
  public:
    LocalController(const Feeder& feeder, ControlMode mode);

    ControlMode mode() const noexcept { return mode_; }
    /// Next setpoint for inverter `pv` on `m.phase`. Uses only `m` and this inverter's constants.
    PhaseDispatch dispatch(std::size_t pv, const LocalMeasurement& m, double prev_q) const;

    const PhaseArray<ImpedancePair>& thevenin(std::size_t pv) const { return thevenin_.at(pv); }
    const PhaseArray<ImpedancePair>& parent_segment(std::size_t pv) const { return parent_.at(pv); }

  private:
    ControlMode mode_;
    std::vector<PhaseArray<ImpedancePair>> thevenin_;
    std::vector<PhaseArray<ImpedancePair>> parent_;
    std::vector<double> rating_;
};

}  // namespace gridflux
