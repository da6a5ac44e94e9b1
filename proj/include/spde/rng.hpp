#pragma once

#include <cstdint>
#include <random>

namespace spde {

using Rng = std::mt19937_64;

// splitmix64 step; used only for seed derivation, never as the sampling stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Published stream tags.  Every consumer of randomness draws from a generator
// seeded as derive_seed(master, trajectory_index, tag); distinct tags give
// independent streams, so trajectories are reproducible regardless of the
// number of worker threads or their scheduling.
namespace stream {
inline constexpr std::uint64_t subordinator = 1;  // stable time-change increments
inline constexpr std::uint64_t gaussian = 2;      // per-mode Brownian increments
inline constexpr std::uint64_t initial = 3;       // random initial conditions
inline constexpr std::uint64_t bootstrap = 4;     // resampling in estimators
inline constexpr std::uint64_t synthetic = 5;     // synthetic test draws
}  // namespace stream

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t tag) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= (index + 0x9E3779B97F4A7C15ull) * 0xC2B2AE3D27D4EB4Full;
    h ^= splitmix64(s);
    s ^= (tag + 0x165667B19E3779F9ull) * 0x27D4EB2F165667C5ull;
    h ^= splitmix64(s);
    return h;
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
    return Rng(derive_seed(master, index, tag));
}

}  // namespace spde
