#include "gridflux/powerflow_nonlinear.hpp"

#include <algorithm>
#include <cmath>

#include "gridflux/powerflow_linear.hpp"

namespace gridflux {

namespace {

PhaseArray<Complex> load_currents(const Bus& bus, const PhaseArray<Complex>& injection, const PhaseArray<Complex>& v) {
    PhaseArray<Complex> i;
    bus.phases.for_each([&](Phase p) {
        const Complex demand = -injection[p];
        if (demand != Complex{}) i[p] = std::conj(demand / v[p]);
    });
    return i;
}

}  // namespace

PhasorSolution solve_nonlinear(const Feeder& feeder, const Injections& injections, double v_substation,
                               const SweepOptions& options) {
    const std::size_t n = feeder.num_buses();
    if (injections.size() != n) throw Error("injection vector size does not match the feeder");

    PhasorSolution sol;
    const auto source = balanced_phasors(v_substation);
    if (options.warm_start && options.warm_start->v.size() == n) {
        sol.v = options.warm_start->v;
    } else {
        sol.v.assign(n, {});
        for (BusIndex b = 0; b < n; ++b) feeder.bus(b).phases.for_each([&](Phase p) { sol.v[b][p] = source[p]; });
    }
    feeder.bus(feeder.root()).phases.for_each([&](Phase p) { sol.v[feeder.root()][p] = source[p]; });
    sol.i_branch.assign(feeder.segments().size(), {});
    sol.s_flow.assign(feeder.segments().size(), {});

    const auto order = feeder.topological_order();
    std::vector<PhaseArray<Complex>> acc(n);

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        sol.iterations = iter;

        // backward sweep: branch current = load current + currents of child branches
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const BusIndex b = *it;
            acc[b] = load_currents(feeder.bus(b), injections[b], sol.v[b]);
            for (SegmentIndex s : feeder.child_segments(b))
                for (Phase p : kAllPhases) acc[b][p] += sol.i_branch[s][p];
            if (auto s = feeder.parent_segment(b)) sol.i_branch[*s] = acc[b];
        }

        // forward sweep: V_j = V_i - Z I over the full phase-coupled impedance
        double max_change = 0.0;
        double min_mag = v_substation;
        for (BusIndex b : order) {
            auto s = feeder.parent_segment(b);
            if (!s) continue;
            const auto& seg = feeder.segment(*s);
            const auto& i = sol.i_branch[*s];
            feeder.bus(b).phases.for_each([&](Phase p) {
                Complex drop{};
                seg.phases.for_each([&](Phase q) { drop += seg.z(p, q) * i[q]; });
                const Complex v_new = sol.v[seg.from][p] - drop;
                max_change = std::max(max_change, std::abs(v_new - sol.v[b][p]));
                min_mag = std::min(min_mag, std::abs(v_new));
                sol.v[b][p] = v_new;
            });
        }

        if (!(min_mag >= options.collapse_threshold)) {
            sol.status = SolveStatus::voltage_collapse;
            sol.converged = false;
            break;
        }
        if (max_change < options.tolerance) {
            sol.status = SolveStatus::converged;
            sol.converged = true;
            break;
        }
    }

    for (SegmentIndex s = 0; s < feeder.segments().size(); ++s) {
        const auto& seg = feeder.segment(s);
        seg.phases.for_each([&](Phase p) { sol.s_flow[s][p] = sol.v[seg.from][p] * std::conj(sol.i_branch[s][p]); });
    }
    return sol;
}

double residual(const Feeder& feeder, const PhasorSolution& sol, const Injections& injections) {
    double worst = 0.0;
    const std::size_t n = feeder.num_buses();

    for (SegmentIndex s = 0; s < feeder.segments().size(); ++s) {
        const auto& seg = feeder.segment(s);
        const auto& vi = sol.v[seg.from];
        const auto& vj = sol.v[seg.to];
        const auto& i = sol.i_branch[s];

        // zI for the loss term
        PhaseArray<Complex> zi;
        seg.phases.for_each([&](Phase p) { seg.phases.for_each([&](Phase q) { zi[p] += seg.z(p, q) * i[q]; }); });

        // v_i = v_j + (S z^H + z S^H) - z I I^H z^H over the receiving bus's phases
        const PhaseSet ph = feeder.bus(seg.to).phases;
        ph.for_each([&](Phase p) {
            ph.for_each([&](Phase q) {
                Complex szh{};  // (S z^H)^{pq} = sum_k V_i^p conj(I^k) conj(z^{qk})
                Complex zsh{};  // (z S^H)^{pq} = sum_k z^{pk} I^k conj(V_i^q)
                seg.phases.for_each([&](Phase k) {
                    szh += vi[p] * std::conj(i[k]) * std::conj(seg.z(q, k));
                    zsh += seg.z(p, k) * i[k] * std::conj(vi[q]);
                });
                const Complex lhs = vi[p] * std::conj(vi[q]);
                const Complex rhs = vj[p] * std::conj(vj[q]) + szh + zsh - zi[p] * std::conj(zi[q]);
                worst = std::max(worst, std::abs(lhs - rhs));
            });
        });
    }

    // s_L,j = diag(S_ij - z I I^H) - sum_k diag(S_jk), and current balance
    for (BusIndex b = 0; b < n; ++b) {
        auto parent = feeder.parent_segment(b);
        if (!parent) continue;
        const auto& seg = feeder.segment(*parent);
        const auto& i = sol.i_branch[*parent];
        PhaseArray<Complex> zi;
        seg.phases.for_each([&](Phase p) { seg.phases.for_each([&](Phase q) { zi[p] += seg.z(p, q) * i[q]; }); });
        feeder.bus(b).phases.for_each([&](Phase p) {
            Complex received = sol.v[seg.from][p] * std::conj(i[p]) - zi[p] * std::conj(i[p]);
            Complex out_current{};
            for (SegmentIndex c : feeder.child_segments(b)) {
                received -= sol.v[b][p] * std::conj(sol.i_branch[c][p]);
                out_current += sol.i_branch[c][p];
            }
            const Complex demand = -injections[b][p];
            worst = std::max(worst, std::abs(received - demand));
            const Complex load_current = demand == Complex{} ? Complex{} : std::conj(demand / sol.v[b][p]);
            worst = std::max(worst, std::abs(i[p] - out_current - load_current));
        });
    }
    return worst;
}

std::vector<PhaseArray<double>> magnitudes(const Feeder& feeder, const PhasorSolution& solution) {
    std::vector<PhaseArray<double>> out(feeder.num_buses());
    for (BusIndex b = 0; b < feeder.num_buses(); ++b)
        feeder.bus(b).phases.for_each([&](Phase p) { out[b][p] = std::abs(solution.v[b][p]); });
    return out;
}

}  // namespace gridflux
