#include "gridflux/agreement.hpp"

#include <algorithm>
#include <cmath>

#include "gridflux/powerflow_linear.hpp"
#include "gridflux/powerflow_nonlinear.hpp"

namespace gridflux {

Agreement solver_agreement(const Feeder& feeder, double loading) {
    const auto inj = load_injections(feeder, loading);
    const auto lin = solve_linear(feeder, inj, feeder.v_source());
    const auto nl = solve_nonlinear(feeder, inj, feeder.v_source());
    const auto mag = magnitudes(feeder, nl);

    Agreement a;
    a.loading = loading;
    a.iterations = nl.iterations;
    a.converged = nl.converged;
    for (BusIndex b = 0; b < feeder.num_buses(); ++b)
        feeder.bus(b).phases.for_each([&](Phase p) {
            const double v_lin = std::sqrt(std::max(lin.v_sq[b][p], 0.0));
            a.max_abs_error = std::max(a.max_abs_error, std::abs(v_lin - mag[b][p]));
        });
    a.residual = residual(feeder, nl, inj);
    return a;
}

}  // namespace gridflux
