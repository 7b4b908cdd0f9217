#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cpfit {

/// Seedable pseudorandom stream with platform-stable output.
///
/// The engine is std::mt19937_64, whose raw 64-bit output sequence is fully
/// pinned by the C++ standard. Both variate transforms below are written out
/// explicitly so that, given IEEE-754 doubles, a seed reproduces the same
/// value sequence on every platform:
///   - uniform(): the top 53 bits of one engine draw, scaled to [0, 1)
///   - normal():  Box-Muller cosine branch; consumes exactly two engine
///     draws per variate (no caching of the sine branch)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53-bit resolution. One engine draw.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal variate. Exactly two engine draws.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        // 1 - u1 keeps the argument of log strictly positive
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * kPi * u2);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// splitmix64 finalizer; used to derive independent stream seeds
    /// (e.g. the initial-guess stream from a problem seed).
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;
    std::mt19937_64 engine_;
};

} // namespace cpfit
