#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gridflux/sim_engine.hpp"

namespace gridflux {

/// Column order of every per-strategy array below.
inline constexpr std::array<ControlMode, 3> kStrategies = {ControlMode::none, ControlMode::thevenin, ControlMode::pfm};

struct ComparisonRow {
    std::string bus;
    double variability = 0.0;
    std::array<double, 3> savfi{};  // pu; mean over seeds, windows and the bus's phases
};

struct OrderingTally {
    std::size_t cells = 0;
    std::size_t satisfied = 0;  // cells with pfm <= thevenin <= none
    double fraction() const noexcept { return cells ? static_cast<double>(satisfied) / static_cast<double>(cells) : 0.0; }
};

struct StrategyComparison {
    std::vector<ComparisonRow> rows;                  // bus order, then variability order
    std::vector<std::array<double, 3>> mean_savfi;    // per variability, mean over the selected buses
    OrderingTally bus_cells;    // (variability, seed, bus, window); bus SAVFI = mean over its phases
    OrderingTally phase_cells;  // (variability, seed, bus, phase, window)
};

/// Runs none/thevenin/pfm at matched seeds for every variability level and
/// tabulates SAVFI at `buses`. `base` supplies everything except control,
/// variability and seed. Scenarios run through run_sweep in seed batches.
StrategyComparison compare_strategies(const std::shared_ptr<const Feeder>& feeder, const ScenarioConfig& base,
                                      std::span<const double> variabilities, std::span<const std::uint64_t> seeds,
                                      std::span<const BusIndex> buses);

/// Buses hosting at least one PV unit, in bus order.
std::vector<BusIndex> pv_buses(const Feeder& feeder);

}  // namespace gridflux
