#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "hpe/augment.hpp"
#include "hpe/error.hpp"

using namespace hpe;

namespace {

NetInput random_input(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0, 1);
    NetInput in;
    for (double& v : in.data) v = n(rng);
    std::fill(in.foreground.begin(), in.foreground.end(), 1);
    return in;
}

}  // namespace

TEST_CASE("ten variants, deterministic under seed") {
    const NetInput in = random_input(1);
    const auto a = augment(in, 17);
    const auto b = augment(in, 17);
    CHECK(a.size() == kAugmentCount);
    CHECK(a.size() == 10);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k] == b[k]);
        CHECK(a[k].width == 64);
        CHECK(a[k].height == 64);
    }
    const auto c = augment(in, 18);
    CHECK_FALSE(a[0] == c[0]);
    CHECK_FALSE(a[9] == c[9]);
    CHECK(a[5] == c[5]);  // directional crops are fixed
}

TEST_CASE("jitter noise statistics") {
    const NetInput in = random_input(2);
    AugmentConfig cfg;
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const NetInput out = augment_variant(in, AugmentKind::kJitter, seed, cfg);
        double sum = 0, sq = 0;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            const double d = out.data[i] - in.data[i];
            sum += d;
            sq += d * d;
        }
        const double n = static_cast<double>(out.data.size());
        CHECK(n == 4096);
        const double mean = sum / n;
        const double sd = std::sqrt(sq / n - mean * mean);
        CHECK(std::abs(sd - cfg.jitter_sigma) <= 0.1 * cfg.jitter_sigma);
        CHECK(std::abs(mean) <= 4 * cfg.jitter_sigma / std::sqrt(n));
    }
}

TEST_CASE("crop variants stay within the input range") {
    const NetInput in = random_input(3);
    const auto [lo, hi] = std::minmax_element(in.data.begin(), in.data.end());
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto v = augment(in, seed);
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            for (double x : v[k].data) {
                CHECK(x >= *lo - 1e-12);
                CHECK(x <= *hi + 1e-12);
            }
        }
    }
}

TEST_CASE("patch origins") {
    AugmentConfig cfg;
    const double slack = 8.0;
    std::set<std::pair<double, double>> seen;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const PatchOrigin tl = patch_origin(AugmentKind::kCornerTopLeft, seed, cfg);
        const PatchOrigin br = patch_origin(AugmentKind::kCornerBottomRight, seed, cfg);
        const PatchOrigin c = patch_origin(AugmentKind::kCenter, seed, cfg);
        for (const PatchOrigin& p : {tl, br, c}) {
            CHECK(p.x >= 0.0);
            CHECK(p.x <= slack);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= slack);
        }
        seen.insert({tl.x, tl.y});
    }
    CHECK(seen.size() == 1000);
    CHECK(patch_origin(AugmentKind::kDropLeft, 0, cfg) == PatchOrigin{8, 4});
    CHECK(patch_origin(AugmentKind::kDropRight, 0, cfg) == PatchOrigin{0, 4});
    CHECK(patch_origin(AugmentKind::kDropTop, 0, cfg) == PatchOrigin{4, 8});
    CHECK(patch_origin(AugmentKind::kDropBottom, 0, cfg) == PatchOrigin{4, 0});
    CHECK_THROWS_AS(patch_origin(AugmentKind::kJitter, 0, cfg), InvalidArgumentError);
}

TEST_CASE("crop_patch of the full frame is the identity") {
    const NetInput in = random_input(4);
    const NetInput out = crop_patch(in, {0, 0}, 64);
    for (std::size_t i = 0; i < in.data.size(); ++i) CHECK(std::abs(out.data[i] - in.data[i]) <= 1e-12);
}

TEST_CASE("wrong input size") {
    CHECK_THROWS_AS(augment(NetInput(32, 32), 0), ShapeError);
    AugmentConfig bad;
    bad.max_offset = 20;
    CHECK_THROWS_AS(augment(NetInput(), 0, bad), InvalidArgumentError);
}
