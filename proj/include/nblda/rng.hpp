#pragma once

#include <cstdint>
#include <random>

namespace nblda {

// Deterministic random source. The engine is std::mt19937_64 (algorithm fixed
// by the standard); all distribution transforms are implemented here rather
// than through std:: distribution classes, whose algorithms are
// implementation-defined and would tie seeded results to one standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream derived from (seed, stream); used to give each
    // simulation replicate its own schedule-independent source.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Unbiased integer on [0, n), n >= 1, by rejection.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal via Box-Muller (no cached spare, keeps replay simple).
    double normal();

    double exponential(double rate);

    // Marsaglia-Tsang for shape >= 1; boosted by U^(1/shape) below 1.
    double gamma(double shape, double scale);

    // Knuth multiplication below mean 10, Hormann PTRS above.
    std::int64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
};

// SplitMix64 step; exposed for seed-derivation tests.
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace nblda
