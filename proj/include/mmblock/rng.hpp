#pragma once

#include <cstdint>
#include <random>

namespace mmblock {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of stream `index` under `master`: splitmix64(master ^
/// splitmix64(index)). Streams for distinct indices are independent.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept
{
    return splitmix64(master ^ splitmix64(index));
}

inline double uniform01(Engine& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace mmblock
