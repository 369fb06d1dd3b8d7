#include "gridflux/sim_engine.hpp"

#include <algorithm>
#include <cmath>

#include "gridflux/powerflow_nonlinear.hpp"

namespace gridflux {

std::string_view to_string(ViolationPreset preset) {
    switch (preset) {
    case ViolationPreset::none: return "none";
    case ViolationPreset::overvoltage: return "overvoltage";
    case ViolationPreset::undervoltage: return "undervoltage";
    }
    return "none";
}

std::optional<ViolationPreset> parse_violation_preset(std::string_view text) {
    if (text == "none") return ViolationPreset::none;
    if (text == "overvoltage") return ViolationPreset::overvoltage;
    if (text == "undervoltage") return ViolationPreset::undervoltage;
    return std::nullopt;
}

std::string_view to_string(MeasurementTiming timing) {
    return timing == MeasurementTiming::lagged ? "lagged" : "settled";
}

void check(const Scenario& sc) {
    if (!sc.feeder) throw Error("scenario has no feeder");
    if (sc.steps() < 2) throw Error("scenario horizon must be at least two steps");
    if (sc.load_multiplier.size() != sc.steps()) throw Error("load profile does not cover the horizon");
    if (sc.pv_output.size() != sc.feeder->pv_units().size()) throw Error("one pv output series per pv unit is required");
    for (const auto& s : sc.pv_output)
        if (s.size() != sc.steps()) throw Error("pv output series does not cover the horizon");
    if (!(sc.band.low < sc.band.high)) throw Error("voltage band requires low < high");
    if (sc.savfi_window == 0) throw Error("savfi window must be at least one step");
    if (!(sc.v_substation > 0.0)) throw Error("substation voltage must be positive");
}

namespace {

double default_start(const ScenarioConfig& c) {
    if (c.start_min) return *c.start_min;
    const double span = static_cast<double>(c.steps) * c.pv_profile.step_min;
    if (span >= c.pv_profile.day_length_min) return 0.0;
    const double noon = 0.5 * (c.pv_profile.sunrise_min + c.pv_profile.sunset_min);
    return std::max(0.0, std::round(noon - 0.5 * span));
}

std::vector<std::vector<double>> pv_series(const Feeder& feeder, const ScenarioConfig& c, const std::vector<double>& t_min,
                                           const std::vector<double>& shape_scale) {
    std::vector<double> cs(t_min.size());
    for (std::size_t k = 0; k < t_min.size(); ++k) cs[k] = clear_sky_at(c.pv_profile, t_min[k]) * shape_scale[k];
    std::vector<std::vector<double>> out;
    const auto n_pv = feeder.pv_units().size();
    for (std::size_t u = 0; u < n_pv; ++u) {
        const std::uint64_t stream = c.correlated_pv ? 0 : u;
        out.push_back(with_variability(cs, c.variability, derive_seed(c.seed, stream)));
    }
    return out;
}

Scenario base_scenario(std::shared_ptr<const Feeder> feeder, const ScenarioConfig& c) {
    check(c.pv_profile);
    if (!(c.variability >= 0.0 && c.variability <= 1.0)) throw Error("variability must lie in [0, 1]");
    if (c.steps < 2) throw Error("scenario horizon must be at least two steps");
    Scenario sc;
    sc.feeder = std::move(feeder);
    sc.control = c.control;
    sc.seed = c.seed;
    sc.variability = c.variability;
    sc.v_substation = c.v_substation.value_or(sc.feeder->v_source());
    sc.timing = c.timing;
    sc.include_load_in_dp = c.include_load_in_dp;
    sc.band = c.band;
    sc.savfi_window = c.savfi_window;
    sc.tolerance = c.tolerance;
    sc.max_iterations = c.max_iterations;
    sc.warm_start = c.warm_start;
    const double start = default_start(c);
    for (std::size_t k = 0; k < c.steps; ++k) sc.t_min.push_back(start + static_cast<double>(k) * c.pv_profile.step_min);
    if (c.load_profile.empty()) {
        sc.load_multiplier.assign(c.steps, c.load_scale);
    } else {
        if (c.load_profile.size() < c.steps) throw Error("load profile is shorter than the horizon");
        for (std::size_t k = 0; k < c.steps; ++k) sc.load_multiplier.push_back(c.load_profile[k] * c.load_scale);
    }
    return sc;
}

Injections injections_at(const Feeder& f, double load_mult, const std::vector<PhaseArray<double>>& p,
                         const std::vector<PhaseArray<double>>& q) {
    Injections inj = load_injections(f, load_mult);
    const auto units = f.pv_units();
    for (std::size_t k = 0; k < units.size(); ++k)
        units[k].phases.for_each([&](Phase ph) { inj[units[k].bus][ph] += Complex(p[k][ph], q[k][ph]); });
    return inj;
}

/// What the sensors at one PV bus report for one interval.
struct BusRecord {
    BusIndex bus = kNoBus;
    PhaseArray<double> dp_inj;
    PhaseArray<double> p_now;
    std::vector<PhaseArray<FlowDelta>> child;  // per child segment
};

/// Holds one record per PV bus; every read is reported to the probe.
class MeasurementBoard {
  public:
    MeasurementBoard(const EngineProbe* probe, std::size_t n) : probe_(probe), records_(n) {}

    BusRecord& write(std::size_t pv) { return records_[pv]; }
    const BusRecord& read(std::size_t reader_pv, std::size_t record_pv) const {
        const BusRecord& r = records_.at(record_pv);
        if (probe_ && probe_->on_measurement_read) probe_->on_measurement_read(reader_pv, r.bus);
        return r;
    }

  private:
    const EngineProbe* probe_;
    std::vector<BusRecord> records_;
};

}  // namespace

Scenario make_scenario(std::shared_ptr<const Feeder> feeder, const ScenarioConfig& config) {
    Scenario sc = base_scenario(std::move(feeder), config);
    sc.pv_output = pv_series(*sc.feeder, config, sc.t_min, std::vector<double>(sc.steps(), 1.0));
    return sc;
}

Scenario make_violation_scenario(std::shared_ptr<const Feeder> feeder, ViolationPreset kind, const ScenarioConfig& config) {
    if (kind == ViolationPreset::none) throw Error("violation scenario needs overvoltage or undervoltage");
    if (feeder->pv_units().empty()) throw Error("feeder has no pv units to drive a violation");
    ScenarioConfig c = config;
    if (c.steps >= static_cast<std::size_t>(c.pv_profile.day_length_min / c.pv_profile.step_min)) c.steps = 120;
    if (!c.start_min) {
        const double noon = 0.5 * (c.pv_profile.sunrise_min + c.pv_profile.sunset_min);
        c.start_min = std::round(noon - 0.5 * static_cast<double>(c.steps) * c.pv_profile.step_min);
    }

    // The event occupies the middle third of the window; outside it PV follows the forecast.
    const bool over = kind == ViolationPreset::overvoltage;
    double load = over ? 0.3 : 1.2;           // fraction of nominal demand
    double forecast = over ? 0.5 : 1.0;       // PV outside the event, fraction of clear sky
    const double actual = over ? 1.0 : 0.2;   // PV during the event, fraction of clear sky

    const double t_mid = *c.start_min + 0.5 * static_cast<double>(c.steps) * c.pv_profile.step_min;
    const double cs_mid = clear_sky_at(c.pv_profile, t_mid);
    if (cs_mid <= 0.0) throw Error("violation window lies outside daylight");
    const auto& f = *feeder;
    const auto units = f.pv_units();

    auto extreme = [&](double pv_fraction, double load_mult) {
        std::vector<double> out(units.size(), cs_mid * pv_fraction);
        auto p = realize_pv_injections(f, out);
        std::vector<PhaseArray<double>> q(units.size());
        auto sol = solve_nonlinear(f, injections_at(f, load_mult, p, q), c.v_substation.value_or(f.v_source()),
                                   {c.tolerance, c.max_iterations, 0.5, nullptr});
        if (sol.status == SolveStatus::voltage_collapse) return 0.0;  // counts as undervoltage
        double hi = 0.0;
        double lo = 1e9;
        for (const auto& bus_v : magnitudes(f, sol))
            for (Phase p : kAllPhases)
                if (bus_v[p] > 0.0) {
                    hi = std::max(hi, bus_v[p]);
                    lo = std::min(lo, bus_v[p]);
                }
        return over ? hi : lo;
    };
    auto violates = [&](double v) { return over ? v > c.band.high : v < c.band.low; };

    bool found = false;
    for (int solves = 0; solves + 2 <= 20;) {
        const double base_v = extreme(forecast, load);
        const double event_v = extreme(actual, load);
        solves += 2;
        if (violates(base_v)) {
            if (!over) throw Error("undervoltage preset: the feeder violates the band even at forecast PV output");
            forecast *= 0.7;
            continue;
        }
        if (violates(event_v)) {
            found = true;
            break;
        }
        if (over) {
            load *= 0.6;
            if (load < 1e-3) break;
        } else {
            load *= 1.15;
        }
    }
    if (!found)
        throw Error(std::string(to_string(kind)) + " preset: feeder '" + f.name() +
                    "' could not be driven outside the band within the search budget");

    Scenario sc = base_scenario(feeder, c);
    sc.preset = kind;
    sc.load_multiplier.assign(sc.steps(), load * c.load_scale);
    std::vector<double> shape(sc.steps(), forecast);
    const std::size_t third = sc.steps() / 3;
    for (std::size_t k = third; k < sc.steps() - third; ++k) shape[k] = actual;
    sc.pv_output = pv_series(f, c, sc.t_min, shape);
    return sc;
}

std::vector<double> ScenarioResult::voltage_series(BusIndex bus, Phase phase) const {
    std::vector<double> out(v_mag.size());
    for (std::size_t t = 0; t < v_mag.size(); ++t) out[t] = v_mag[t].at(bus)[phase];
    return out;
}

std::size_t MetricsReport::violation_count() const {
    std::size_t n = 0;
    for (const auto& v : violations) n += v.count();
    return n;
}

MetricsReport compute_metrics(const ScenarioResult& result, std::size_t window, VoltageBand band) {
    MetricsReport m;
    m.window = window;
    std::vector<std::vector<double>> series;
    for (BusIndex b = 0; b < result.bus_ids.size(); ++b) {
        result.bus_phases[b].for_each([&](Phase p) {
            m.keys.push_back({b, p});
            series.push_back(result.voltage_series(b, p));
        });
    }
    m.savfi = savfi_all(series, window);
    m.min_voltage = series.empty() ? 0.0 : 1e9;
    for (const auto& s : series) {
        m.violations.push_back(violations(s, band));
        for (double v : s) {
            m.max_voltage = std::max(m.max_voltage, v);
            m.min_voltage = std::min(m.min_voltage, v);
        }
    }
    return m;
}

ScenarioResult run(const Scenario& sc, const EngineProbe* probe) {
    check(sc);
    const Feeder& f = *sc.feeder;
    const auto units = f.pv_units();
    const std::size_t n_pv = units.size();
    const std::size_t steps = sc.steps();
    const LocalController controller(f, sc.control);

    ScenarioResult res;
    res.feeder_name = f.name();
    res.control = sc.control;
    res.preset = sc.preset;
    res.timing = sc.timing;
    res.seed = sc.seed;
    res.variability = sc.variability;
    res.base_kva_per_phase = f.base_kva_per_phase();
    for (BusIndex b = 0; b < f.num_buses(); ++b) {
        res.bus_ids.push_back(f.bus(b).id);
        res.bus_phases.push_back(f.bus(b).phases);
        res.bus_depth.push_back(f.depth(b));
    }
    for (const auto& u : units) res.pv_bus.push_back(u.bus);
    res.t_min = sc.t_min;

    std::vector<PhaseArray<double>> q(n_pv);
    std::vector<PhaseArray<double>> p_prev(n_pv);
    std::optional<PhasorSolution> prev1;  // final solve at t-1
    std::optional<PhasorSolution> prev2;  // final solve at t-2

    std::size_t max_depth = 0;
    for (BusIndex b = 0; b < f.num_buses(); ++b) max_depth = std::max(max_depth, f.depth(b));
    const std::size_t max_passes = max_depth + 3;

    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> out(n_pv);
        for (std::size_t k = 0; k < n_pv; ++k) out[k] = sc.pv_output[k][t];
        const auto p_now = realize_pv_injections(f, out);

        MeasurementBoard board(probe, n_pv);
        for (std::size_t k = 0; k < n_pv; ++k) {
            auto& rec = board.write(k);
            rec.bus = units[k].bus;
            rec.p_now = p_now[k];
            rec.child.assign(f.children(units[k].bus).size(), {});
            units[k].phases.for_each([&](Phase ph) {
                if (t == 0) return;
                rec.dp_inj[ph] = p_now[k][ph] - p_prev[k][ph];
                if (sc.include_load_in_dp)
                    rec.dp_inj[ph] -= (sc.load_multiplier[t] - sc.load_multiplier[t - 1]) * f.bus(units[k].bus).load[ph].real();
            });
        }
        auto observe_children = [&](const PhasorSolution* newer, const PhasorSolution* older) {
            for (std::size_t k = 0; k < n_pv; ++k) {
                auto& rec = board.write(k);
                const auto segs = f.child_segments(units[k].bus);
                for (std::size_t c = 0; c < segs.size(); ++c) {
                    rec.child[c] = {};
                    if (!newer || !older) continue;
                    units[k].phases.for_each([&](Phase ph) {
                        const Complex d = newer->s_flow[segs[c]][ph] - older->s_flow[segs[c]][ph];
                        rec.child[c][ph] = {d.real(), d.imag()};
                    });
                }
            }
        };

        std::vector<ControlDispatch> dispatch(n_pv);
        std::vector<std::vector<LocalMeasurement>> measured(n_pv);
        auto dispatch_all = [&] {
            std::vector<PhaseArray<double>> q_next(n_pv);
            for (std::size_t k = 0; k < n_pv; ++k) {
                const BusRecord& rec = board.read(k, k);
                dispatch[k].bus = rec.bus;
                measured[k].clear();
                units[k].phases.for_each([&](Phase ph) {
                    LocalMeasurement m;
                    m.bus = rec.bus;
                    m.phase = ph;
                    m.dp_inj = rec.dp_inj[ph];
                    m.p_inj_now = rec.p_now[ph];
                    for (const auto& c : rec.child) m.child_flow_deltas.push_back(c[ph]);
                    const PhaseDispatch d = controller.dispatch(k, m, q[k][ph]);
                    dispatch[k].phases[ph] = d;
                    q_next[k][ph] = d.q_setpoint;
                    measured[k].push_back(std::move(m));
                });
            }
            return q_next;
        };

        const double load_mult = sc.load_multiplier[t];
        SweepOptions opts{sc.tolerance, sc.max_iterations, 0.5, nullptr};
        if (sc.warm_start && prev1) opts.warm_start = &*prev1;
        auto solve = [&](const std::vector<PhaseArray<double>>& q_set) {
            return solve_nonlinear(f, injections_at(f, load_mult, p_now, q_set), sc.v_substation, opts);
        };

        PhasorSolution sol;
        std::vector<PhaseArray<double>> q_set;
        // Only pfm reads child flows, so the other laws need no settling passes.
        if (sc.timing == MeasurementTiming::lagged || sc.control != ControlMode::pfm) {
            observe_children(prev1 ? &*prev1 : nullptr, prev2 ? &*prev2 : nullptr);
            q_set = dispatch_all();
            sol = solve(q_set);
        } else {
            q_set = q;
            sol = solve(q_set);
            for (std::size_t pass = 0; pass < max_passes; ++pass) {
                observe_children(&sol, prev1 ? &*prev1 : nullptr);
                auto q_next = dispatch_all();
                double change = 0.0;
                for (std::size_t k = 0; k < n_pv; ++k)
                    for (Phase ph : kAllPhases) change = std::max(change, std::abs(q_next[k][ph] - q_set[k][ph]));
                q_set = std::move(q_next);
                sol = solve(q_set);
                if (change <= 1e-12) break;
            }
        }

        if (!sol.converged) {
            res.degraded = true;
            res.degraded_steps.push_back(t);
        }
        res.v_mag.push_back(magnitudes(f, sol));
        res.pv_p.push_back(p_now);
        res.dispatch.push_back(dispatch);
        if (sc.record_measurements) res.measurements.push_back(std::move(measured));
        res.iterations.push_back(sol.iterations);

        q = q_set;
        p_prev = p_now;
        prev2 = std::move(prev1);
        prev1 = std::move(sol);
    }

    res.metrics = compute_metrics(res, sc.savfi_window, sc.band);
    return res;
}

}  // namespace gridflux
