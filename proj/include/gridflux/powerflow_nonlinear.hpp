#pragma once

#include <vector>

#include "gridflux/powerflow.hpp"

namespace gridflux {

// ---------------------------------------------------------------------------
// Nonlinear backward/forward sweep
// ---------------------------------------------------------------------------

enum class SolveStatus { converged, max_iterations, voltage_collapse };

struct PhasorSolution {
    std::vector<PhaseArray<Complex>> v;         // per bus, pu
    std::vector<PhaseArray<Complex>> i_branch;  // per segment, pu
    std::vector<PhaseArray<Complex>> s_flow;    // per segment, sending end, pu
    int iterations = 0;
    bool converged = false;
    SolveStatus status = SolveStatus::max_iterations;
};

struct SweepOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    double collapse_threshold = 0.5;
    const PhasorSolution* warm_start = nullptr;  // flat start when null
};

PhasorSolution solve_nonlinear(const Feeder& feeder, const Injections& injections, double v_substation = 1.0,
                               const SweepOptions& options = {});

/// Worst violation of the exact branch-flow relations (voltage-drop matrix
/// equation with loss term, per-phase power balance, current balance).
double residual(const Feeder& feeder, const PhasorSolution& solution, const Injections& injections);

std::vector<PhaseArray<double>> magnitudes(const Feeder& feeder, const PhasorSolution& solution);

}  // namespace gridflux
