#pragma once

#include <cstdint>
#include <random>

namespace mhpolicy {

/// Seedable 64-bit random stream. Every stochastic operation in the library
/// takes one of these by reference; nothing holds a global generator.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to derive well-separated child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`. Deterministic in both arguments.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{mix_seed(seed)}; }

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
    return Rng{derive_seed(master, index)};
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>{0.0, 1.0}(rng);
}

} // namespace mhpolicy
