#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridflux {

using Complex = std::complex<double>;
using BusIndex = std::size_t;
using SegmentIndex = std::size_t;

inline constexpr std::size_t kNumPhases = 3;
inline constexpr BusIndex kNoBus = static_cast<BusIndex>(-1);

enum class Phase : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr std::array<Phase, kNumPhases> kAllPhases{Phase::A, Phase::B, Phase::C};

constexpr std::size_t index_of(Phase p) noexcept { return static_cast<std::size_t>(p); }

constexpr char to_char(Phase p) noexcept { return "ABC"[index_of(p)]; }

inline std::optional<Phase> phase_from_char(char c) noexcept {
    switch (c) {
    case 'A': case 'a': return Phase::A;
    case 'B': case 'b': return Phase::B;
    case 'C': case 'c': return Phase::C;
    default: return std::nullopt;
    }
}

/// Subset of {A, B, C}. Iterates in A < B < C order.
class PhaseSet {
  public:
    constexpr PhaseSet() = default;

    static constexpr PhaseSet all() { return PhaseSet{0b111}; }
    static constexpr PhaseSet of(Phase p) { return PhaseSet{static_cast<std::uint8_t>(1U << index_of(p))}; }

    /// Parses "ABC", "AC", "b" and so on. Returns nullopt on unknown or repeated letters.
    static std::optional<PhaseSet> parse(std::string_view text) {
        PhaseSet out;
        for (char c : text) {
            auto p = phase_from_char(c);
            if (!p || out.contains(*p)) return std::nullopt;
            out.insert(*p);
        }
        return out;
    }

    constexpr bool contains(Phase p) const noexcept { return (bits_ >> index_of(p)) & 1U; }
    constexpr void insert(Phase p) noexcept { bits_ |= static_cast<std::uint8_t>(1U << index_of(p)); }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::size_t size() const noexcept {
        return static_cast<std::size_t>(((bits_ >> 0) & 1U) + ((bits_ >> 1) & 1U) + ((bits_ >> 2) & 1U));
    }
    constexpr bool subset_of(PhaseSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
    constexpr std::uint8_t bits() const noexcept { return bits_; }

    std::string to_string() const {
        std::string s;
        for (Phase p : kAllPhases)
            if (contains(p)) s.push_back(to_char(p));
        return s;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (Phase p : kAllPhases)
            if (contains(p)) f(p);
    }

    friend constexpr bool operator==(PhaseSet, PhaseSet) = default;

  private:
    constexpr explicit PhaseSet(std::uint8_t bits) : bits_(bits) {}
    std::uint8_t bits_ = 0;
};

/// Fixed-size per-phase storage. Absent phases hold a default value and are
/// never read by the solvers; presence is tracked by the owning PhaseSet.
template <typename T>
struct PhaseArray {
    std::array<T, kNumPhases> values{};

    constexpr T& operator[](Phase p) noexcept { return values[index_of(p)]; }
    constexpr const T& operator[](Phase p) const noexcept { return values[index_of(p)]; }

    friend constexpr bool operator==(const PhaseArray&, const PhaseArray&) = default;
};

/// Phase-coupled series impedance or similar 3x3 quantity, indexed [row][col] by phase.
struct PhaseMatrix {
    std::array<std::array<Complex, kNumPhases>, kNumPhases> m{};

    Complex& operator()(Phase row, Phase col) noexcept { return m[index_of(row)][index_of(col)]; }
    const Complex& operator()(Phase row, Phase col) const noexcept { return m[index_of(row)][index_of(col)]; }
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace gridflux
