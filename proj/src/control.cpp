#include "gridflux/control.hpp"

#include <algorithm>
#include <cmath>

namespace gridflux {

std::string_view to_string(ControlMode mode) {
    switch (mode) {
    case ControlMode::none: return "none";
    case ControlMode::thevenin: return "thevenin";
    case ControlMode::pfm: return "pfm";
    }
    return "none";
}

std::optional<ControlMode> parse_control_mode(std::string_view text) {
    if (text == "none") return ControlMode::none;
    if (text == "thevenin") return ControlMode::thevenin;
    if (text == "pfm") return ControlMode::pfm;
    return std::nullopt;
}

Capability clip_capability(double p_inj, double q_requested, double rating) {
    const double q_max = std::sqrt(std::max(rating * rating - p_inj * p_inj, 0.0));
    if (q_requested > q_max) return {q_max, true};
    if (q_requested < -q_max) return {-q_max, true};
    return {q_requested, false};
}

TheveninImpedance thevenin_impedance(const Feeder& feeder, BusIndex bus) {
    TheveninImpedance out{bus, {}};
    for (SegmentIndex s : feeder.path_to_root(bus)) {
        const auto& seg = feeder.segment(s);
        feeder.bus(bus).phases.for_each([&](Phase p) {
            out.z[p].r += seg.z(p, p).real();
            out.z[p].x += seg.z(p, p).imag();
        });
    }
    return out;
}

ImpedancePair thevenin_impedance(const Feeder& feeder, BusIndex bus, Phase phase) {
    if (!feeder.bus(bus).phases.contains(phase))
        throw Error(std::string("phase ") + to_char(phase) + " is not present at bus " + feeder.bus(bus).id);
    return thevenin_impedance(feeder, bus).z[phase];
}

namespace {

PhaseDispatch apply(double prev_q, double dq, double p_now, double rating) {
    const auto cap = clip_capability(p_now, prev_q + dq, rating);
    return {cap.q, cap.clipped};
}

}  // namespace

PhaseDispatch thevenin_dispatch(const LocalMeasurement& m, ImpedancePair thevenin, double prev_q, double rating) {
    if (thevenin.x == 0.0) return apply(prev_q, 0.0, m.p_inj_now, rating);
    const double dq = -(thevenin.r / thevenin.x) * m.dp_inj;
    return apply(prev_q, dq, m.p_inj_now, rating);
}

PhaseDispatch pfm_dispatch(const LocalMeasurement& m, ImpedancePair parent_segment, double prev_q, double rating) {
    if (parent_segment.x == 0.0) return apply(prev_q, 0.0, m.p_inj_now, rating);
    double sum_dp = 0.0;
    double sum_dq = 0.0;
    for (const auto& d : m.child_flow_deltas) {
        sum_dp += d.dp;
        sum_dq += d.dq;
    }
    const double dq = (parent_segment.r / parent_segment.x) * (sum_dp - m.dp_inj) + sum_dq;
    return apply(prev_q, dq, m.p_inj_now, rating);
}

LocalController::LocalController(const Feeder& feeder, ControlMode mode) : mode_(mode) {
    for (const auto& pv : feeder.pv_units()) {
        thevenin_.push_back(thevenin_impedance(feeder, pv.bus).z);
        PhaseArray<ImpedancePair> local{};
        if (auto s = feeder.parent_segment(pv.bus)) {
            const auto& seg = feeder.segment(*s);
            pv.phases.for_each([&](Phase p) { local[p] = {seg.z(p, p).real(), seg.z(p, p).imag()}; });
        }
        parent_.push_back(local);
        rating_.push_back(pv.rating);
    }
}

PhaseDispatch LocalController::dispatch(std::size_t pv, const LocalMeasurement& m, double prev_q) const {
    switch (mode_) {
    case ControlMode::none: return {prev_q, false};
    case ControlMode::thevenin: return thevenin_dispatch(m, thevenin_.at(pv)[m.phase], prev_q, rating_.at(pv));
    case ControlMode::pfm: return pfm_dispatch(m, parent_.at(pv)[m.phase], prev_q, rating_.at(pv));
    }
    return {prev_q, false};
}

}  // namespace gridflux
