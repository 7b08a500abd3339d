#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace vcwidth {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Small deterministic generator. Every draw is specified by this header
/// alone, so streams are identical across standard libraries.
class SplitMix64 {
public:
    constexpr explicit SplitMix64(std::uint64_t state) : state_(state) {}

    constexpr std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Uses Lemire's multiply-shift reduction.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

/// Stream for one Monte Carlo sample: a pure function of (seed, index), so a
/// run split across threads reproduces the serial run bit for bit.
inline SplitMix64 sample_stream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ mix64(index + 0x3c6ef372fe94f82bULL));
}

/// Fills out with independent standard normals (Box-Muller).
inline void fill_gaussian(SplitMix64& rng, std::span<double> out) {
    std::size_t i = 0;
    while (i < out.size()) {
        const double u1 = 1.0 - rng.uniform();  // (0, 1]
        const double u2 = rng.uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[i++] = radius * std::cos(angle);
        if (i < out.size()) out[i++] = radius * std::sin(angle);
    }
}

/// The Gaussian direction used as sample `index` of a run seeded by `seed`.
inline void gaussian_direction(std::uint64_t seed, std::uint64_t index, std::span<double> out) {
    auto rng = sample_stream(seed, index);
    fill_gaussian(rng, out);
}

}  // namespace vcwidth
