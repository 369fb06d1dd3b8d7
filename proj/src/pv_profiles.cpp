#include "gridflux/pv_profiles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gridflux {

void check(const PvProfileSpec& spec) {
    if (!(spec.sunrise_min < spec.sunset_min) || !(spec.sunset_min <= spec.day_length_min) || spec.sunrise_min < 0.0)
        throw Error("pv profile requires 0 <= sunrise < sunset <= day_length");
    if (!(spec.variability >= 0.0 && spec.variability <= 1.0)) throw Error("variability must lie in [0, 1]");
    if (!(spec.step_min > 0.0)) throw Error("step_min must be positive");
}

double clear_sky_at(const PvProfileSpec& spec, double t_min) {
    if (t_min <= spec.sunrise_min || t_min >= spec.sunset_min) return 0.0;
    const double mid = 0.5 * (spec.sunrise_min + spec.sunset_min);
    const double half_span = 0.5 * (spec.sunset_min - spec.sunrise_min);
    const double u = (t_min - mid) / half_span;
    return std::max(0.0, 1.0 - u * u);
}

std::vector<double> clear_sky(const PvProfileSpec& spec) {
    check(spec);
    const auto n = static_cast<std::size_t>(std::ceil(spec.day_length_min / spec.step_min - 1e-9));
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = clear_sky_at(spec, static_cast<double>(k) * spec.step_min);
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined key
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> noise_draws(double variability, std::uint64_t seed, std::size_t count) {
    if (!(variability >= 0.0 && variability <= 1.0)) throw Error("variability must lie in [0, 1]");
    std::vector<double> eps(count, 0.0);
    if (variability == 0.0) return eps;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, variability / 3.0);
    for (double& e : eps) e = noise(rng);
    return eps;
}

std::vector<double> with_variability(std::span<const double> series, double variability, std::uint64_t seed) {
    // one draw per sample, night included, so a step's draw does not depend on the series values
    const auto eps = noise_draws(variability, seed, series.size());
    std::vector<double> out(series.begin(), series.end());
    if (variability == 0.0) return out;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k] * (1.0 + eps[k]), 0.0, 1.0);
    return out;
}

std::vector<PhaseArray<double>> realize_pv_injections(const Feeder& feeder, std::span<const double> normalized) {
    const auto units = feeder.pv_units();
    if (normalized.size() != units.size()) throw Error("one normalized output per pv unit is required");
    std::vector<PhaseArray<double>> out(units.size());
    for (std::size_t k = 0; k < units.size(); ++k)
        units[k].phases.for_each([&](Phase p) { out[k][p] = units[k].p_max * normalized[k]; });
    return out;
}

}  // namespace gridflux
