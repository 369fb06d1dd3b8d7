#pragma once

#include <vector>

#include "gridflux/sim_engine.hpp"

namespace gridflux {

/// Runs independent scenarios across OpenMP threads. Results come back in
/// input order and are bit-identical to run_sweep_serial.
std::vector<ScenarioResult> run_sweep(const std::vector<Scenario>& scenarios);

/// Reference implementation: one scenario after another on the calling thread.
std::vector<ScenarioResult> run_sweep_serial(const std::vector<Scenario>& scenarios);

/// Sets the OpenMP team size for subsequent sweeps; 0 keeps the runtime default.
void set_sweep_threads(int threads);
int sweep_threads();

}  // namespace gridflux
