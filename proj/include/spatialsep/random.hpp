#pragma once

#include <cstdint>
#include <random>

namespace spatialsep {

// std::mt19937_64 output is fixed by the standard; the distributions are not,
// so the mappings to real values live here to keep runs reproducible across
// standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n)
{
    return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Derives an independent seed for a named sub-stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace spatialsep
