#pragma once

#include <vector>

#include "gridflux/powerflow.hpp"

namespace gridflux {

// ---------------------------------------------------------------------------
// Linearized (lossless) branch-flow model
// ---------------------------------------------------------------------------

struct LinearSolution {
    std::vector<PhaseArray<double>> v_sq;   // per bus, pu^2
    std::vector<PhaseArray<Complex>> flow;  // per segment, P + jQ sent toward the receiving bus, pu
};

/// One backward pass accumulating flows, one forward pass for squared voltage magnitudes.
/// Throws Error if injections are given on phases a bus does not have.
LinearSolution solve_linear(const Feeder& feeder, const Injections& injections, double v_substation = 1.0);

/// Rotated impedance z^{pq} conj(alpha^{p-q}) folding mutual coupling into the
/// voltage-drop relation under the assumption that phase voltages are 120 degrees
/// apart. Diagonal entries equal the physical self impedance.
PhaseMatrix effective_impedance(const Segment& segment);

struct SensitivityTerm {
    SegmentIndex segment;
    PhaseArray<double> two_r;  // d(v_sq at bus, phase p) / d(-P on phase q of segment)
    PhaseArray<double> two_x;  // same for Q
};

/// Coefficients relating flow changes on each ancestor segment to the
/// squared-voltage change at (bus, phase): dv = -sum(two_r[q] dP_q + two_x[q] dQ_q).
std::vector<SensitivityTerm> voltage_sensitivity(const Feeder& feeder, BusIndex bus, Phase phase);

}  // namespace gridflux
