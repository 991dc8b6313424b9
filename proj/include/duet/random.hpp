#pragma once

#include <cstdint>
#include <random>

namespace duet {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based seed for entry (a, b) of a named stream, so each draw is
/// reproducible regardless of evaluation order or thread count.
constexpr std::uint64_t entry_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                                   std::uint64_t b = 0) {
    return mix64(mix64(mix64(mix64(seed) ^ stream) ^ a) ^ b);
}

inline std::mt19937_64 entry_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                                    std::uint64_t b = 0) {
    return std::mt19937_64(entry_seed(seed, stream, a, b));
}

}  // namespace duet
