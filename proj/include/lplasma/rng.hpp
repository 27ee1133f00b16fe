#pragma once

#include <cstdint>
#include <random>

namespace lplasma {

/// SplitMix64 finalizer; used to derive independent stream seeds from a root seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-task seed: the same (root, task) always yields the same stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t task) {
    return splitmix64(splitmix64(root) ^ splitmix64(task + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

} // namespace lplasma
