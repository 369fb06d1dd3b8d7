#include "gridflux/powerflow_linear.hpp"

#include <cmath>
#include <numbers>

namespace gridflux {

Injections load_injections(const Feeder& feeder, double load_multiplier) {
    Injections inj(feeder.num_buses());
    for (BusIndex b = 0; b < feeder.num_buses(); ++b) {
        const auto& bus = feeder.bus(b);
        bus.phases.for_each([&](Phase p) { inj[b][p] = -load_multiplier * bus.load[p]; });
    }
    return inj;
}

PhaseArray<Complex> balanced_phasors(double v) {
    const double shift = 2.0 * std::numbers::pi / 3.0;
    PhaseArray<Complex> out;
    out[Phase::A] = std::polar(v, 0.0);
    out[Phase::B] = std::polar(v, -shift);
    out[Phase::C] = std::polar(v, shift);
    return out;
}

PhaseMatrix effective_impedance(const Segment& segment) {
    // With V^b = alpha V^a and V^c = alpha^2 V^a (alpha = exp(-j 2pi/3)) and |V| ~ 1,
    // the off-diagonal sending-end flow is S^{pq} ~ alpha^{p-q} S^{qq}. Then
    // Re[S^{pq} conj(z^{pq})] = Re[S^{qq} conj(ztilde^{pq})] with ztilde^{pq} = conj(alpha^{p-q}) z^{pq},
    // which keeps the voltage drop affine in the per-phase flows.
    PhaseMatrix out;
    segment.phases.for_each([&](Phase p) {
        segment.phases.for_each([&](Phase q) {
            const double n = static_cast<double>(static_cast<int>(index_of(p)) - static_cast<int>(index_of(q)));
            const Complex rot = std::polar(1.0, 2.0 * std::numbers::pi * n / 3.0);
            out(p, q) = segment.z(p, q) * rot;
        });
    });
    return out;
}

LinearSolution solve_linear(const Feeder& feeder, const Injections& injections, double v_substation) {
    const std::size_t n = feeder.num_buses();
    if (injections.size() != n) throw Error("injection vector size does not match the feeder");
    for (BusIndex b = 0; b < n; ++b)
        for (Phase p : kAllPhases)
            if (!feeder.bus(b).phases.contains(p) && injections[b][p] != Complex{})
                throw Error("injection on absent phase " + std::string(1, to_char(p)) + " at bus " + feeder.bus(b).id);

    LinearSolution sol;
    sol.v_sq.assign(n, {});
    sol.flow.assign(feeder.segments().size(), {});

    // Backward: flow into a bus's subtree equals the subtree's net demand.
    std::vector<PhaseArray<Complex>> subtree(n);
    const auto order = feeder.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const BusIndex b = *it;
        auto& acc = subtree[b];
        for (Phase p : kAllPhases) acc[p] = -injections[b][p];
        for (SegmentIndex s : feeder.child_segments(b))
            for (Phase p : kAllPhases) acc[p] += sol.flow[s][p];
        if (auto s = feeder.parent_segment(b)) sol.flow[*s] = acc;
    }

    // Forward: v_j^p = v_i^p - 2 sum_q (r~^{pq} P^q + x~^{pq} Q^q).
    const double v0 = v_substation * v_substation;
    feeder.bus(feeder.root()).phases.for_each([&](Phase p) { sol.v_sq[feeder.root()][p] = v0; });
    for (BusIndex b : order) {
        auto s = feeder.parent_segment(b);
        if (!s) continue;
        const auto& seg = feeder.segment(*s);
        const PhaseMatrix zt = effective_impedance(seg);
        const auto& flow = sol.flow[*s];
        feeder.bus(b).phases.for_each([&](Phase p) {
            double drop = 0.0;
            seg.phases.for_each([&](Phase q) { drop += zt(p, q).real() * flow[q].real() + zt(p, q).imag() * flow[q].imag(); });
            sol.v_sq[b][p] = sol.v_sq[seg.from][p] - 2.0 * drop;
        });
    }
    return sol;
}

std::vector<SensitivityTerm> voltage_sensitivity(const Feeder& feeder, BusIndex bus, Phase phase) {
    if (bus >= feeder.num_buses()) throw Error("unknown bus index " + std::to_string(bus));
    if (!feeder.bus(bus).phases.contains(phase))
        throw Error(std::string("phase ") + to_char(phase) + " is not present at bus " + feeder.bus(bus).id);
    std::vector<SensitivityTerm> out;
    for (SegmentIndex s : feeder.path_to_root(bus)) {
        const auto& seg = feeder.segment(s);
        const PhaseMatrix zt = effective_impedance(seg);
        SensitivityTerm term{s, {}, {}};
        seg.phases.for_each([&](Phase q) {
            term.two_r[q] = 2.0 * zt(phase, q).real();
            term.two_x[q] = 2.0 * zt(phase, q).imag();
        });
        out.push_back(term);
    }
    return out;
}

}  // namespace gridflux
