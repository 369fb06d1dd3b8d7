#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gridflux {

/// SAVFI is reported in units of 1e-3 pu.
inline constexpr double kSavfiScale = 1e3;

/// |V(t+1) - V(t)| for t = 0..n-2. Throws Error for fewer than two samples.
std::vector<double> delta_v(std::span<const double> voltage);

struct SavfiWindow {
    std::size_t start = 0;   // index into the fluctuation series
    std::size_t length = 0;  // samples averaged; the last window may be short
    double value = 0.0;      // pu
};

/// Mean fluctuation over consecutive non-overlapping windows of `window` samples.
std::vector<SavfiWindow> savfi(std::span<const double> fluctuation, std::size_t window);

struct VoltageBand {
    double low = 0.95;
    double high = 1.05;
};

struct ViolationSummary {
    std::vector<std::uint8_t> flags;  // 1 where the sample lies outside the band
    std::size_t over = 0;
    std::size_t under = 0;
    double worst_excursion = 0.0;  // pu beyond the nearest band edge
    std::size_t count() const noexcept { return over + under; }
};

ViolationSummary violations(std::span<const double> voltage, VoltageBand band = {});

/// SAVFI for many voltage series at once. The parallel kernel and the serial
/// reference produce identical results.
std::vector<std::vector<SavfiWindow>> savfi_all(const std::vector<std::vector<double>>& voltage_series, std::size_t window);
std::vector<std::vector<SavfiWindow>> savfi_all_serial(const std::vector<std::vector<double>>& voltage_series,
                                                       std::size_t window);

}  // namespace gridflux
