#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridflux/feeder.hpp"

namespace gridflux {

struct PvProfileSpec {
    double day_length_min = 1440.0;
    double sunrise_min = 360.0;
    double sunset_min = 1080.0;
    double variability = 0.0;  // fraction in [0, 1]; 0.3 means 99.7% of draws within +-30%
    std::uint64_t seed = 0;
    double step_min = 1.0;
};

/// Throws Error when sunrise < sunset <= day_length or variability in [0, 1] fails.
void check(const PvProfileSpec& spec);

/// Normalized clear-sky output at minute t: 1 - ((t - mid) / half_span)^2 inside daylight, else 0.
double clear_sky_at(const PvProfileSpec& spec, double t_min);

/// Series sampled at step_min over [0, day_length).
std::vector<double> clear_sky(const PvProfileSpec& spec);

/// The raw multiplicative noise behind with_variability: `count` draws of N(0, (variability/3)^2).
std::vector<double> noise_draws(double variability, std::uint64_t seed, std::size_t count);

/// clip(series * (1 + eps), 0, 1) with eps ~ N(0, (variability/3)^2) i.i.d. per sample.
/// The same seed always yields the same series.
std::vector<double> with_variability(std::span<const double> series, double variability, std::uint64_t seed);

/// Deterministic per-unit seed derived from a run seed; distinct units get
/// independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Active power per PV per phase, pu: p_max * normalized output. Absent phases are 0.
std::vector<PhaseArray<double>> realize_pv_injections(const Feeder& feeder, std::span<const double> normalized);

}  // namespace gridflux
