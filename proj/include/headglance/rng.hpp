#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace headglance {

// Every random stream is derived from one master seed plus a purpose tag
// and a counter, so any single Monte-Carlo iteration (or subject, or tree)
// can be reproduced in isolation regardless of scheduling.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0) {
    return Rng(derive_seed(master, purpose, index));
}

// Uniform double in [0, 1) from the top 53 bits. Used instead of
// std::uniform_real_distribution where bit-stable output matters.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection (unbiased, implementation-independent).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Standard normal via Box-Muller (implementation-independent).
double standard_normal(Rng& rng);

}  // namespace headglance
