#pragma once

#include <cstdint>
#include <random>

namespace danse {

// splitmix64 (Steele, Lea, Vigna). Used both as a seed hash and to derive
// independent per-realization streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t {
    Disorder = 0x1d5a9e5f0b7c4e11ULL,
    Phases = 0x6f3d8a2c91e07b55ULL,
};

// 64-bit splittable hash of (master_seed, index, stream tag).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 SeedStream stream) {
    std::uint64_t h = splitmix64(master ^ static_cast<std::uint64_t>(stream));
    return splitmix64(h + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// Uniform double in [0, 1) from the top 53 bits. mt19937_64 output is fixed
// by the standard, and this mapping avoids the implementation-defined
// behavior of std::uniform_real_distribution, so streams are bit-exact
// across platforms.
inline double u01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace danse
