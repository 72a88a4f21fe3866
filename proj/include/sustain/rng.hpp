#pragma once

// Seeded random streams. Every run derives its own generator from
// (seed, stream index) with splitmix64, so replications never share state
// and each one is bit-exact for a given standard library.

#include <cstdint>
#include <random>

namespace sustain {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Generator for substream `stream` of `seed` (stream 0 is the root).
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    return Engine(seq);
}

}  // namespace sustain
