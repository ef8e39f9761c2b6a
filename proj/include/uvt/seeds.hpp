#pragma once

#include <cstdint>

namespace uvt {

/// Counter-based sub-seed derivation: every stochastic stream of a run
/// (angles, noise, splits, init) is a pure function of the master seed.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t { Angles = 1, Noise = 2, Fit = 3, Init = 4, Split = 5, Distribution = 6 };

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t counter = 0) {
    return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream))) + counter);
}

} // namespace uvt
