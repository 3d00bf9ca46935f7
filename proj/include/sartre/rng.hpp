#pragma once

#include <cstdint>
#include <random>

namespace sartre {

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent child seed from (parent, index). Child seeds for
/// different indices never depend on each other, so adding streams never
/// perturbs existing ones.
constexpr Seed derive_seed(Seed parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

// Well-known stream tags used when deriving per-purpose seeds.
namespace stream {
inline constexpr std::uint64_t kGraph = 1;
inline constexpr std::uint64_t kSpec = 2;
inline constexpr std::uint64_t kSample = 3;
inline constexpr std::uint64_t kTrees = 4;
inline constexpr std::uint64_t kSubsample = 5;
}  // namespace stream

}  // namespace sartre
