#pragma once

#include "gridflux/feeder.hpp"

namespace gridflux {

/// Linear versus nonlinear solve of the feeder's own loads at one loading level.
struct Agreement {
    double loading = 1.0;
    double max_abs_error = 0.0;  // max over buses and phases of | |V|_lin - |V|_nl |, pu
    double residual = 0.0;       // nonlinear solution against the exact branch-flow relations
    int iterations = 0;
    bool converged = false;
};

/// Solves at the feeder's source setpoint with no PV output.
Agreement solver_agreement(const Feeder& feeder, double loading);

}  // namespace gridflux
