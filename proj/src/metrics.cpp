#include "gridflux/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gridflux/types.hpp"

namespace gridflux {

std::vector<double> delta_v(std::span<const double> voltage) {
    if (voltage.size() < 2) throw Error("voltage series needs at least two samples");
    std::vector<double> out(voltage.size() - 1);
    for (std::size_t t = 0; t + 1 < voltage.size(); ++t) out[t] = std::abs(voltage[t + 1] - voltage[t]);
    return out;
}

std::vector<SavfiWindow> savfi(std::span<const double> fluctuation, std::size_t window) {
    if (window == 0) throw Error("savfi window must be at least one sample");
    std::vector<SavfiWindow> out;
    for (std::size_t start = 0; start < fluctuation.size(); start += window) {
        const std::size_t len = std::min(window, fluctuation.size() - start);
        double sum = 0.0;
        for (std::size_t k = start; k < start + len; ++k) sum += fluctuation[k];
        out.push_back({start, len, sum / static_cast<double>(len)});
    }
    return out;
}

ViolationSummary violations(std::span<const double> voltage, VoltageBand band) {
    if (!(band.low < band.high)) throw Error("voltage band requires low < high");
    ViolationSummary s;
    s.flags.assign(voltage.size(), 0);
    for (std::size_t t = 0; t < voltage.size(); ++t) {
        const double v = voltage[t];
        if (v > band.high) {
            s.flags[t] = 1;
            ++s.over;
            s.worst_excursion = std::max(s.worst_excursion, v - band.high);
        } else if (v < band.low) {
            s.flags[t] = 1;
            ++s.under;
            s.worst_excursion = std::max(s.worst_excursion, band.low - v);
        }
    }
    return s;
}

namespace {

std::vector<SavfiWindow> savfi_of_series(const std::vector<double>& v, std::size_t window) {
    if (v.size() < 2) return {};
    return savfi(delta_v(v), window);
}

}  // namespace

std::vector<std::vector<SavfiWindow>> savfi_all_serial(const std::vector<std::vector<double>>& voltage_series,
                                                       std::size_t window) {
    std::vector<std::vector<SavfiWindow>> out(voltage_series.size());
    for (std::size_t k = 0; k < voltage_series.size(); ++k) out[k] = savfi_of_series(voltage_series[k], window);
    return out;
}

std::vector<std::vector<SavfiWindow>> savfi_all(const std::vector<std::vector<double>>& voltage_series,
                                                std::size_t window) {
    if (window == 0) throw Error("savfi window must be at least one sample");
    std::vector<std::vector<SavfiWindow>> out(voltage_series.size());
    const auto n = static_cast<std::ptrdiff_t>(voltage_series.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out[i] = savfi_of_series(voltage_series[i], window);
    }
    return out;
}

}  // namespace gridflux
