#pragma once

#include <cstdint>
#include <random>

namespace flag {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` under master seed `seed`.
/// Streams are keyed by (seed, stream) only, so results do not depend on
/// which worker draws them.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x464c6147U};
    return Rng(seq);
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace flag
