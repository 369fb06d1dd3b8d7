#include "gridflux/sweep.hpp"

#include <exception>

#ifdef GRIDFLUX_HAVE_OPENMP
#include <omp.h>
#endif

namespace gridflux {

std::vector<ScenarioResult> run_sweep_serial(const std::vector<Scenario>& scenarios) {
    std::vector<ScenarioResult> out;
    out.reserve(scenarios.size());
    for (const auto& sc : scenarios) out.push_back(run(sc));
    return out;
}

std::vector<ScenarioResult> run_sweep(const std::vector<Scenario>& scenarios) {
    std::vector<ScenarioResult> out(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            out[i] = run(scenarios[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

void set_sweep_threads(int threads) {
#ifdef GRIDFLUX_HAVE_OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int sweep_threads() {
#ifdef GRIDFLUX_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace gridflux
