#pragma once

// Seeded sampling helpers with identical output on every standard library.
// std::uniform_*_distribution and std::shuffle are implementation-defined,
// so seeded artifacts would otherwise differ between toolchains.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace kaleido {

using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling. n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // values below 2^64 mod n would bias the low residues
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x < threshold);
    return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace kaleido
