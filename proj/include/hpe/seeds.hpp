#pragma once

#include <cstdint>

namespace hpe {

/// Named sub-streams fanned out from a single run seed.
enum class SeedStream : std::uint64_t {
    kPose = 1,
    kNoise = 2,
    kInit = 3,
    kShuffle = 4,
    kAugment = 5,
    kValidation = 6,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index = 0) {
    return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

}  // namespace hpe
