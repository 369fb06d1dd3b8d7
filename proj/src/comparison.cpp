#include "gridflux/comparison.hpp"

#include <algorithm>

#include "gridflux/sweep.hpp"

namespace gridflux {

std::vector<BusIndex> pv_buses(const Feeder& feeder) {
    std::vector<BusIndex> out;
    for (const auto& u : feeder.pv_units()) out.push_back(u.bus);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

bool ordered(const std::array<double, 3>& s) { return s[2] <= s[1] && s[1] <= s[0]; }

}  // namespace

StrategyComparison compare_strategies(const std::shared_ptr<const Feeder>& feeder, const ScenarioConfig& base,
                                      std::span<const double> variabilities, std::span<const std::uint64_t> seeds,
                                      std::span<const BusIndex> buses) {
    if (variabilities.empty() || seeds.empty() || buses.empty())
        throw Error("comparison needs at least one variability, seed and bus");
    for (BusIndex b : buses)
        if (b >= feeder->num_buses()) throw Error("comparison bus index out of range");

    const std::size_t nv = variabilities.size();
    const std::size_t nb = buses.size();
    // sums[v][b][strategy], divided by counts at the end
    std::vector<std::vector<std::array<double, 3>>> sums(nv, std::vector<std::array<double, 3>>(nb));
    std::vector<std::vector<std::size_t>> counts(nv, std::vector<std::size_t>(nb, 0));
    StrategyComparison cmp;

    const std::size_t batch = static_cast<std::size_t>(std::max(1, sweep_threads()));
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t s0 = 0; s0 < seeds.size(); s0 += batch) {
            const std::size_t s1 = std::min(seeds.size(), s0 + batch);
            std::vector<Scenario> scenarios;
            for (std::size_t s = s0; s < s1; ++s) {
                for (ControlMode mode : kStrategies) {
                    ScenarioConfig c = base;
                    c.control = mode;
                    c.variability = variabilities[v];
                    c.seed = seeds[s];
                    Scenario sc = make_scenario(feeder, c);
                    sc.record_measurements = false;
                    scenarios.push_back(std::move(sc));
                }
            }
            const auto results = run_sweep(scenarios);

            for (std::size_t s = 0; s < s1 - s0; ++s) {
                const ScenarioResult* r[3] = {&results[3 * s], &results[3 * s + 1], &results[3 * s + 2]};
                const auto& keys = r[0]->metrics.keys;
                for (std::size_t bi = 0; bi < nb; ++bi) {
                    std::vector<std::size_t> ks;
                    for (std::size_t k = 0; k < keys.size(); ++k)
                        if (keys[k].bus == buses[bi]) ks.push_back(k);
                    const std::size_t windows = r[0]->metrics.savfi[ks.front()].size();
                    for (std::size_t w = 0; w < windows; ++w) {
                        std::array<double, 3> bus_mean{};
                        for (std::size_t k : ks) {
                            std::array<double, 3> cell{};
                            for (int m = 0; m < 3; ++m) {
                                cell[m] = r[m]->metrics.savfi[k][w].value;
                                bus_mean[m] += cell[m] / static_cast<double>(ks.size());
                            }
                            ++cmp.phase_cells.cells;
                            if (ordered(cell)) ++cmp.phase_cells.satisfied;
                        }
                        ++cmp.bus_cells.cells;
                        if (ordered(bus_mean)) ++cmp.bus_cells.satisfied;
                        for (int m = 0; m < 3; ++m) sums[v][bi][m] += bus_mean[m];
                        ++counts[v][bi];
                    }
                }
            }
        }
    }

    cmp.mean_savfi.assign(nv, {});
    for (std::size_t bi = 0; bi < nb; ++bi) {
        for (std::size_t v = 0; v < nv; ++v) {
            ComparisonRow row{feeder->bus(buses[bi]).id, variabilities[v], {}};
            for (int m = 0; m < 3; ++m) {
                row.savfi[m] = sums[v][bi][m] / static_cast<double>(counts[v][bi]);
                cmp.mean_savfi[v][m] += row.savfi[m] / static_cast<double>(nb);
            }
            cmp.rows.push_back(std::move(row));
        }
    }
    return cmp;
}

}  // namespace gridflux
