#include "hpe/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hpe/error.hpp"
#include "hpe/seeds.hpp"

namespace hpe {

namespace {

void check_input(const NetInput& input, const AugmentConfig& config) {
    if (input.width != kNetSide || input.height != kNetSide || input.data.size() != kNetSide * kNetSide) {
        throw ShapeError("augment expects a 64x64 input, got " + std::to_string(input.width) + "x" +
                         std::to_string(input.height));
    }
    if (config.patch_side == 0 || config.patch_side > kNetSide) {
        throw InvalidArgumentError("patch side must be in [1, 64]");
    }
    if (config.max_offset < 0.0 || config.max_offset > static_cast<double>(kNetSide - config.patch_side)) {
        throw InvalidArgumentError("crop offset range exceeds the slack around the patch");
    }
}

}  // namespace

std::uint64_t variant_seed(std::uint64_t seed, AugmentKind kind) {
    return derive_seed(seed, SeedStream::kAugment, static_cast<std::uint64_t>(kind));
}

PatchOrigin patch_origin(AugmentKind kind, std::uint64_t seed, const AugmentConfig& config) {
    const double slack = static_cast<double>(kNetSide - config.patch_side);
    const double mid = slack / 2.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, config.max_offset);
    switch (kind) {
        case AugmentKind::kCornerTopLeft: {
            const double jx = jitter(rng), jy = jitter(rng);
            return {jx, jy};
        }
        case AugmentKind::kCornerTopRight: {
            const double jx = jitter(rng), jy = jitter(rng);
            return {slack - jx, jy};
        }
        case AugmentKind::kCornerBottomLeft: {
            const double jx = jitter(rng), jy = jitter(rng);
            return {jx, slack - jy};
        }
        case AugmentKind::kCornerBottomRight: {
            const double jx = jitter(rng), jy = jitter(rng);
            return {slack - jx, slack - jy};
        }
        case AugmentKind::kCenter: {
            const double half = config.max_offset / 2.0;
            const double jx = jitter(rng), jy = jitter(rng);
            return {std::clamp(mid + jx - half, 0.0, slack), std::clamp(mid + jy - half, 0.0, slack)};
        }
        case AugmentKind::kDropBottom:
            return {mid, slack - config.max_offset};
        case AugmentKind::kDropTop:
            return {mid, config.max_offset};
        case AugmentKind::kDropLeft:
            return {config.max_offset, mid};
        case AugmentKind::kDropRight:
            return {slack - config.max_offset, mid};
        case AugmentKind::kJitter:
            break;
    }
    throw InvalidArgumentError("jitter variant has no patch origin");
}

NetInput crop_patch(const NetInput& input, PatchOrigin origin, std::size_t patch_side) {
    const std::size_t w = input.width;
    const std::size_t h = input.height;
    NetInput out(w, h);
    const double scale_x = static_cast<double>(patch_side) / static_cast<double>(w);
    const double scale_y = static_cast<double>(patch_side) / static_cast<double>(h);

    struct Tap {
        std::size_t lo, hi;
        double frac;
    };
    auto tap = [](double s, std::size_t len) {
        s = std::clamp(s, 0.0, static_cast<double>(len - 1));
        const auto lo = static_cast<std::size_t>(std::floor(s));
        const std::size_t hi = std::min(lo + 1, len - 1);
        return Tap{lo, hi, hi == lo ? 0.0 : s - static_cast<double>(lo)};
    };

    for (std::size_t y = 0; y < h; ++y) {
        const Tap ty = tap(origin.y + (static_cast<double>(y) + 0.5) * scale_y - 0.5, h);
        for (std::size_t x = 0; x < w; ++x) {
            const Tap tx = tap(origin.x + (static_cast<double>(x) + 0.5) * scale_x - 0.5, w);
            const std::size_t cols[2] = {tx.lo, tx.hi};
            const std::size_t rows[2] = {ty.lo, ty.hi};
            const double wx[2] = {1.0 - tx.frac, tx.frac};
            const double wy[2] = {1.0 - ty.frac, ty.frac};
            double acc = 0.0;
            bool fg = true;
            for (int j = 0; j < 2; ++j) {
                for (int i = 0; i < 2; ++i) {
                    const double wt = wx[i] * wy[j];
                    if (wt == 0.0) continue;
                    acc += wt * input.at(cols[i], rows[j]);
                    fg = fg && input.foreground[rows[j] * w + cols[i]] != 0;
                }
            }
            out.at(x, y) = acc;
            out.foreground[y * w + x] = fg ? 1 : 0;
        }
    }
    return out;
}

NetInput augment_variant(const NetInput& input, AugmentKind kind, std::uint64_t seed,
                         const AugmentConfig& config) {
    check_input(input, config);
    if (kind == AugmentKind::kJitter) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, config.jitter_sigma);
        NetInput out = input;
        for (double& v : out.data) v += noise(rng);
        return out;
    }
    return crop_patch(input, patch_origin(kind, seed, config), config.patch_side);
}

std::vector<NetInput> augment(const NetInput& input, std::uint64_t seed, const AugmentConfig& config) {
    check_input(input, config);
    std::vector<NetInput> out;
    out.reserve(kAugmentCount);
    for (std::size_t k = 0; k < kAugmentCount; ++k) {
        const auto kind = static_cast<AugmentKind>(k);
        out.push_back(augment_variant(input, kind, variant_seed(seed, kind), config));
    }
    return out;
}

}  // namespace hpe
