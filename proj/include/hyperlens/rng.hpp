#pragma once

#include <cmath>
#include <cstdint>

namespace hyperlens {

namespace detail {

// SplitMix64 finalizer; full-avalanche 64-bit mixing.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based generator: every (seed, scene, level, slot) tuple opens an
// independent substream, and draw i is a pure function of (key, i). Scenes
// can therefore be generated in any order, or in parallel, with identical
// output bytes. Output does not depend on host endianness.
class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t scene, std::uint64_t level, std::uint64_t slot)
        : key_(detail::mix64(detail::mix64(detail::mix64(detail::mix64(seed) ^ scene) ^ level) ^
                             slot)) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    // Uniform draw in the half-open-from-zero interval (0, 1].
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the paired value is cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace hyperlens
