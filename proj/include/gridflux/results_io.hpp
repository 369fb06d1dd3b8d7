#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gridflux/sim_engine.hpp"

namespace gridflux {

inline constexpr std::string_view kResultsHeader = "t_min,bus,phase,v_pu,p_inj_kw,q_inj_kvar,flag_violation";
inline constexpr std::string_view kSavfiHeader = "bus,phase,window_start,savfi";
inline constexpr std::string_view kSavfiScaleComment = "# savfi in units of 1e-3 pu";

struct ResultRow {
    double t_min = 0.0;
    std::string bus;
    Phase phase = Phase::A;
    double v_pu = 0.0;
    double p_inj_kw = 0.0;
    double q_inj_kvar = 0.0;
    int flag_violation = 0;
};

struct SavfiRow {
    std::string bus;
    Phase phase = Phase::A;
    double window_start = 0.0;
    double savfi = 0.0;  // 1e-3 pu
};

/// One row per (step, bus, present phase); p/q are the PV injection at that bus.
void write_results_csv(const ScenarioResult& result, std::ostream& out);
/// One row per (bus, phase, window), preceded by a comment giving the scale.
void write_savfi_csv(const ScenarioResult& result, std::ostream& out);
/// Writes `results.csv` and `savfi.csv` into `dir`, creating it if needed.
void write_results(const ScenarioResult& result, const std::filesystem::path& dir);

std::vector<ResultRow> parse_results_csv(std::string_view csv);
std::vector<SavfiRow> parse_savfi_csv(std::string_view csv);

}  // namespace gridflux
