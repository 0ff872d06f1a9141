#pragma once

#include <cmath>
#include <cstdint>

// Counter-based normal variate generation. Every draw is a pure function of
// (seed, path index, step index), so ensembles are bitwise reproducible no
// matter how paths are scheduled across workers.

namespace greflect::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer; bijective on 64 bits.
inline std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Keyed counter hash: seed/path/step/lane each pass through a mixing round.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path,
                                  std::uint64_t step, std::uint64_t lane) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (path + 0xbf58476d1ce4e5b9ULL));
    h = mix64(h ^ (step + 0x94d049bb133111ebULL));
    return mix64(h ^ lane);
}

// Uniform on the open interval (0, 1); never returns 0 or 1.
inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, std::uint64_t path,
                        std::uint64_t step, std::uint64_t lane) {
    return uniform01(counter_hash(seed, path, step, lane));
}

// Standard normal via Box-Muller (cosine branch). Lanes 0 and 1 are reserved
// for the two uniforms; callers needing auxiliary randomness (e.g. control
// switching) must use lanes >= 2 so the noise stream stays common across
// volatility controls.
inline double standard_normal(std::uint64_t seed, std::uint64_t path,
                              std::uint64_t step) {
    const double u1 = uniform01(seed, path, step, 0);
    const double u2 = uniform01(seed, path, step, 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace greflect::rng
