#pragma once

#include <vector>

#include "gridflux/feeder.hpp"

namespace gridflux {

/// Net complex injection per bus per phase, pu, generation minus demand.
using Injections = std::vector<PhaseArray<Complex>>;

/// Injections of the feeder's own loads only (negated demand).
Injections load_injections(const Feeder& feeder, double load_multiplier = 1.0);

/// Balanced positive-sequence phasors of magnitude `v` (angles 0, -120, +120 degrees).
PhaseArray<Complex> balanced_phasors(double v);

}  // namespace gridflux
