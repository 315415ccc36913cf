#include <cmath>

#include "doctest.h"
#include "hpe/error.hpp"
#include "hpe/synthetic.hpp"

using namespace hpe;

namespace {

HeadModel noiseless() {
    HeadModel m;
    m.surface_noise_sigma_mm = 0.0;
    return m;
}

const CameraIntrinsics kCam{400, 400, 63.5, 63.5};

}  // namespace

TEST_CASE("frontal head is mirror symmetric") {
    const Sample s = render_depth(noiseless(), pose_from_euler({0, 0, 0}, {0, 0, 1000}), kCam, 128, 128);
    std::size_t valid = 0;
    for (std::size_t y = 0; y < 128; ++y) {
        for (std::size_t x = 0; x < 64; ++x) {
            const std::size_t m = 127 - x;
            REQUIRE(s.depth.valid(x, y) == s.depth.valid(m, y));
            if (!s.depth.valid(x, y)) continue;
            CHECK(std::abs(s.depth.at(x, y) - s.depth.at(m, y)) <= 1.0);
            ++valid;
        }
    }
    CHECK(valid > 1000);
}

TEST_CASE("yaw moves the nose sideways") {
    auto closest_column = [](const Sample& s) {
        double best = INFINITY;
        std::size_t col = 0;
        for (std::size_t y = 0; y < s.depth.height(); ++y)
            for (std::size_t x = 0; x < s.depth.width(); ++x)
                if (s.depth.valid(x, y) && s.depth.at(x, y) < best) {
                    best = s.depth.at(x, y);
                    col = x;
                }
        return static_cast<double>(col);
    };
    const HeadModel m = noiseless();
    const double frontal = closest_column(render_depth(m, pose_from_euler({0, 0, 0}, {0, 0, 1000}), kCam, 128, 128));
    const double left = closest_column(render_depth(m, pose_from_euler({0, 0, 40}, {0, 0, 1000}), kCam, 128, 128));
    const double right = closest_column(render_depth(m, pose_from_euler({0, 0, -40}, {0, 0, 1000}), kCam, 128, 128));
    CHECK(std::abs(frontal - 63.5) <= 1.0);
    CHECK(left < frontal - 15);
    CHECK(right > frontal + 15);
    CHECK(std::abs((frontal - left) - (right - frontal)) <= 2.0);
}

TEST_CASE("depths respect the model extent") {
    const HeadModel m = noiseless();
    for (const EulerAngles e : {EulerAngles{0, 0, 0}, EulerAngles{30, -20, 60}, EulerAngles{-60, 50, -75}}) {
        const Sample s = render_depth(m, pose_from_euler(e, {20, -10, 950}), kCam, 128, 128);
        for (std::size_t i = 0; i < s.depth.size(); ++i) {
            if (!s.depth.mask()[i]) continue;
            CHECK(s.depth.data()[i] >= 950 - m.extent_mm() - 0.5);
            CHECK(s.depth.data()[i] <= 950 + m.extent_mm() + 0.5);
        }
    }
    CHECK_THROWS_AS(render_depth(m, pose_from_euler({}, {0, 0, 100}), kCam, 32, 32), BehindCameraError);
}

TEST_CASE("generate_dataset") {
    SynthConfig cfg;
    cfg.image_width = 64;
    cfg.image_height = 64;
    cfg.intrinsics = {200, 200, 31.5, 31.5};
    const auto a = generate_dataset(600, cfg, 99);
    const auto b = generate_dataset(600, cfg, 99);
    const auto c = generate_dataset(600, cfg, 100);
    REQUIRE(a.size() == 600);

    double sum[3] = {0, 0, 0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].depth == b[i].depth);
        CHECK(a[i].label.rotation == b[i].label.rotation);
        const EulerAngles& e = a[i].label.euler_deg;
        CHECK(std::abs(e.pitch) <= 60);
        CHECK(std::abs(e.roll) <= 50);
        CHECK(std::abs(e.yaw) <= 75);
        const Vec3& t = a[i].label.head_center_mm;
        CHECK(std::abs(t[0]) <= 40);
        CHECK(std::abs(t[1]) <= 40);
        CHECK(t[2] >= 900);
        CHECK(t[2] <= 1100);
        CHECK(a[i].sequence_id == static_cast<int>(i % 24) + 1);
        sum[0] += e.pitch;
        sum[1] += e.roll;
        sum[2] += e.yaw;
    }
    CHECK_FALSE(a[0].depth == c[0].depth);

    // uniform draws: mean within 3 standard errors of zero
    const double half[3] = {60, 50, 75};
    for (int k = 0; k < 3; ++k) {
        const double se = 2 * half[k] / std::sqrt(12.0) / std::sqrt(600.0);
        CHECK(std::abs(sum[k] / 600.0) < 3 * se);
    }
}

TEST_CASE("head model validation") {
    HeadModel m;
    CHECK_NOTHROW(m.validate());
    m.nose.offset_mm[2] = -50;
    CHECK_THROWS_AS(m.validate(), InvalidArgumentError);
    HeadModel n;
    n.surface_noise_sigma_mm = -1;
    CHECK_THROWS_AS(n.validate(), InvalidArgumentError);
}
