#pragma once

#include <cstdint>
#include <random>

namespace fsqkd {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed-splitting rule used throughout: task k of a run with root seed s is
// seeded with derive_seed(s, k). Keeps parallel sweeps reproducible no matter
// how tasks are scheduled.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream_index) {
    return splitmix64(root ^ splitmix64(stream_index + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace fsqkd
