#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hpe/depth_prep.hpp"

namespace hpe {

inline constexpr std::size_t kAugmentCount = 10;

/// The ten variants produced per preprocessed image, in output order.
enum class AugmentKind : std::size_t {
    kCornerTopLeft,
    kCornerTopRight,
    kCornerBottomLeft,
    kCornerBottomRight,
    kCenter,
    kDropBottom,  // directional crops lose `max_offset` pixels on the named side
    kDropTop,
    kDropLeft,
    kDropRight,
    kJitter,  // additive Gaussian noise, no crop
};

struct AugmentConfig {
    std::size_t patch_side = 56;
    double max_offset = 8.0;      // random crop offset range in pixels, per axis
    double jitter_sigma = 0.05;   // in normalized units
};

struct PatchOrigin {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const PatchOrigin&) const = default;
};

/// Top-left corner of the patch for a crop kind. Throws for kJitter.
PatchOrigin patch_origin(AugmentKind kind, std::uint64_t seed, const AugmentConfig& config = {});

/// Resamples the square patch at `origin` back to the input size.
NetInput crop_patch(const NetInput& input, PatchOrigin origin, std::size_t patch_side);

NetInput augment_variant(const NetInput& input, AugmentKind kind, std::uint64_t seed,
                         const AugmentConfig& config = {});

/// All ten variants. Variant k uses sub-seed k of `seed`.
std::vector<NetInput> augment(const NetInput& input, std::uint64_t seed, const AugmentConfig& config = {});

/// Sub-seed used for variant `kind` by augment().
std::uint64_t variant_seed(std::uint64_t seed, AugmentKind kind);

}  // namespace hpe
