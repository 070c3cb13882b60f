#pragma once

#include <cstdint>
#include <random>

namespace hl {

using Rng = std::mt19937_64;

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed for (worker, replicate) from a master
// seed.  For a fixed master the map (worker, replicate) -> seed is injective
// as long as worker and replicate fit in 32 bits: the packed word is unique
// and mix64 is a bijection.
inline std::uint64_t seed_split(std::uint64_t master, std::uint64_t worker,
                                std::uint64_t replicate) {
    std::uint64_t packed = (worker << 32) | (replicate & 0xffffffffull);
    return mix64(packed ^ mix64(master ^ 0x6a09e667f3bcc908ull));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace hl
