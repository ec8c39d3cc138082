#pragma once

// Counter-based uniform generator. Every draw is a pure hash of its
// coordinate tuple (seed, replica, purpose, cycle, unit), so streams are
// reproducible regardless of execution order and replica k's stream does not
// depend on how many replicas run. Built on the splitmix64 finalizer.

#include <cmath>
#include <cstdint>

namespace flamekit {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Partially-applied hash chain; fork() appends one coordinate.
struct StreamKey {
    std::uint64_t h;
};

inline StreamKey stream(std::uint64_t seed) { return {mix64(seed)}; }

inline StreamKey fork(StreamKey k, std::uint64_t coordinate) {
    return {mix64(k.h ^ coordinate)};
}

// Uniform double in [0, 1) from the 53 high bits of the key.
inline double u01(StreamKey k) {
    return static_cast<double>(k.h >> 11) * 0x1.0p-53;
}

// Standard normal deviate via Box-Muller on two forked uniforms.
inline double gauss(StreamKey k) {
    constexpr double tau = 6.283185307179586476925286766559;
    const double u1 = u01(fork(k, 1));
    const double u2 = u01(fork(k, 2));
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(tau * u2);
}

}  // namespace flamekit
