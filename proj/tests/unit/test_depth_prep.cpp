#include <cmath>
#include <random>

#include "doctest.h"
#include "hpe/depth_prep.hpp"
#include "hpe/error.hpp"
#include "hpe/synthetic.hpp"

using namespace hpe;

namespace {

const CameraIntrinsics kCam{500.0, 500.0, 320.0, 240.0};

DepthMap full_map(std::size_t w, std::size_t h, std::vector<double> values) {
    return DepthMap(w, h, std::move(values), std::vector<std::uint8_t>(w * h, 1));
}

std::pair<double, double> masked_stats(const NetInput& in) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < in.data.size(); ++i) {
        if (!in.foreground[i]) continue;
        sum += in.data[i];
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    for (std::size_t i = 0; i < in.data.size(); ++i) {
        if (in.foreground[i]) sq += (in.data[i] - mean) * (in.data[i] - mean);
    }
    return {mean, sq / static_cast<double>(n)};
}

}  // namespace

TEST_CASE("crop window follows w = f R / Z") {
    const auto w60 = compute_crop_window(kCam, {320, 240}, 1000.0, 120.0);
    CHECK(w60.width == 60);
    CHECK(w60.height == 60);
    CHECK(w60.center_x == 320);
    CHECK(w60.center_y == 240);
    const auto w100 = compute_crop_window(kCam, {320, 240}, 600.0, 120.0);
    CHECK(w100.width == 100);
    CHECK(w100.height == 100);
    CHECK(compute_crop_window(kCam, {0, 0}, 1000.0).width == 60);  // default face width

    CHECK_THROWS_AS(compute_crop_window(kCam, {320, 240}, 0.0), InvalidDistanceError);
    CHECK_THROWS_AS(compute_crop_window(kCam, {320, 240}, -5.0), InvalidDistanceError);

    SUBCASE("doubling the distance halves the window up to rounding") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> z(300.0, 3000.0), f(200.0, 1200.0);
        for (int i = 0; i < 1000; ++i) {
            const CameraIntrinsics cam{f(rng), f(rng), 0, 0};
            const double dist = z(rng);
            const auto near = compute_crop_window(cam, {0, 0}, dist);
            const auto far = compute_crop_window(cam, {0, 0}, 2.0 * dist);
            CHECK(std::abs(2 * far.width - near.width) <= 1);
            CHECK(std::abs(2 * far.height - near.height) <= 1);
        }
    }
}

TEST_CASE("crop") {
    DepthMap map = full_map(4, 4, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
    map.set_valid(1, 2, false);

    SUBCASE("window covering the whole map is the identity") {
        CHECK(crop(map, {2, 2, 4, 4}) == map);
    }
    SUBCASE("pixels outside the frame are invalid") {
        const DepthMap c = crop(map, {0, 0, 4, 4});  // x0 = y0 = -2
        CHECK(c.width() == 4);
        CHECK(c.height() == 4);
        CHECK_FALSE(c.valid(0, 0));
        CHECK_FALSE(c.valid(1, 3));
        CHECK(c.valid(2, 2));
        CHECK(c.at(2, 2) == 1.0);
        CHECK(c.at(3, 3) == 6.0);
        CHECK(c.valid_count() == 4);
    }
    SUBCASE("window fully outside") {
        CHECK_THROWS_AS(crop(map, {20, 20, 4, 4}), EmptyCropError);
        CHECK_THROWS_AS(crop(map, {-3, 1, 4, 4}), EmptyCropError);
    }
}

TEST_CASE("segment_foreground") {
    const DepthMap map = full_map(3, 1, {900, 1000, 1400});
    const DepthMap fg = segment_foreground(map, 1000.0, 150.0);
    CHECK(fg.valid(0, 0));
    CHECK(fg.valid(1, 0));
    CHECK_FALSE(fg.valid(2, 0));
    CHECK(segment_foreground(full_map(2, 2, {1000, 1000, 1000, 1000}), 1000.0, 1.0).valid_count() == 4);
    CHECK_THROWS_AS(segment_foreground(map, 1000.0, 0.0), InvalidArgumentError);

    DepthMap holes = map;
    holes.set_valid(1, 0, false);
    CHECK_FALSE(segment_foreground(holes, 1000.0, 150.0).valid(1, 0));
}

TEST_CASE("resize_to_64") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(500, 1500);
    SUBCASE("64x64 input is reproduced bit for bit") {
        std::vector<double> v(64 * 64);
        for (double& x : v) x = d(rng);
        DepthMap m = full_map(64, 64, v);
        m.at(10, 20) = 0.0;  // invalid pixels carry zero
        m.set_valid(10, 20, false);
        CHECK(resize_to_64(m) == m);
    }
    SUBCASE("constant maps stay constant") {
        const DepthMap out = resize_to_64(full_map(128, 128, std::vector<double>(128 * 128, 800.0)));
        CHECK(out.valid_count() == 64 * 64);
        for (double v : out.data()) CHECK(v == doctest::Approx(800.0).epsilon(1e-15));
    }
    SUBCASE("interpolation stays inside the source range") {
        const DepthMap small = resize_bilinear(full_map(2, 2, {0, 2, 0, 2}), 1, 1);
        const DepthMap back = resize_to_64(small);
        const DepthMap up = resize_to_64(full_map(2, 2, {0, 2, 0, 2}));
        for (const DepthMap* m : {&small, &back, &up}) {
            for (double v : m->data()) {
                CHECK(v >= 0.0);
                CHECK(v <= 2.0);
            }
        }
    }
    SUBCASE("an invalid source pixel invalidates every output touching it") {
        DepthMap m = full_map(4, 4, std::vector<double>(16, 1.0));
        m.set_valid(0, 0, false);
        const DepthMap out = resize_to_64(m);
        CHECK_FALSE(out.valid(0, 0));
        CHECK(out.valid(63, 63));
    }
    CHECK_THROWS_AS(resize_to_64(DepthMap()), InvalidArgumentError);
}

TEST_CASE("normalize") {
    const NetInput n = normalize(full_map(2, 2, {1, 3, 1, 3}));
    CHECK(n.data == std::vector<double>{-1, 1, -1, 1});

    SUBCASE("idempotent on normalized input") {
        DepthMap again = full_map(2, 2, n.data);
        const NetInput twice = normalize(again);
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(twice.data[i] - n.data[i]) <= 1e-12);
    }
    SUBCASE("degenerate inputs") {
        CHECK_THROWS_AS(normalize(full_map(2, 2, {5, 5, 5, 5})), DegenerateInputError);
        CHECK_THROWS_AS(normalize(DepthMap(3, 3)), DegenerateInputError);
    }
    SUBCASE("invalid pixels become zero background") {
        DepthMap m = full_map(3, 1, {10, 20, 999});
        m.set_valid(2, 0, false);
        const NetInput out = normalize(m);
        CHECK(out.data[2] == 0.0);
        CHECK(out.foreground[2] == 0);
        CHECK(out.data[0] == -1.0);
    }
    SUBCASE("random masked inputs reach zero mean and unit variance") {
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> d(400, 2500);
        std::bernoulli_distribution keep(0.7);
        for (int trial = 0; trial < 200; ++trial) {
            DepthMap m(17, 13);
            for (std::size_t y = 0; y < 13; ++y)
                for (std::size_t x = 0; x < 17; ++x) {
                    m.at(x, y) = d(rng);
                    m.set_valid(x, y, keep(rng));
                }
            const auto [mean, var] = masked_stats(normalize(m));
            CHECK(std::abs(mean) <= 1e-6);
            CHECK(std::abs(var - 1.0) <= 1e-6);
        }
    }
}

TEST_CASE("row_stretch") {
    constexpr double bg = 0.0;
    std::vector<double> out(5);

    SUBCASE("foreground span example") {
        stretch_row(std::vector<double>{bg, bg, 5, 7, bg}, std::vector<std::uint8_t>{0, 0, 1, 1, 0}, out);
        CHECK(out == std::vector<double>{5, 5.5, 6, 6.5, 7});
    }
    SUBCASE("legacy origin sampling") {
        const std::vector<double> row{1, 2, 3, 4, 5};
        const std::vector<std::uint8_t> fg{0, 1, 1, 1, 0};
        stretch_row(row, fg, out, StretchMode::kLegacyOrigin);
        CHECK(out == std::vector<double>{1, 1.5, 2, 2.5, 3});
        stretch_row(row, fg, out, StretchMode::kForegroundSpan);
        CHECK(out == std::vector<double>{2, 2.5, 3, 3.5, 4});
    }
    SUBCASE("empty and single-pixel rows") {
        stretch_row(std::vector<double>{3, 4, 5, 6, 7}, std::vector<std::uint8_t>(5, 0), out);
        CHECK(out == std::vector<double>(5, 0.0));
        stretch_row(std::vector<double>{3, 4, 5, 6, 7}, std::vector<std::uint8_t>{0, 0, 0, 1, 0}, out);
        CHECK(out == std::vector<double>(5, 6.0));
    }
    SUBCASE("holes inside the span are bridged") {
        stretch_row(std::vector<double>{2, 0, 4, 0, 0}, std::vector<std::uint8_t>{1, 0, 1, 0, 0}, out);
        CHECK(out == std::vector<double>{2, 2.5, 3, 3.5, 4});
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-3, 3);
    SUBCASE("fully foreground rows are unchanged") {
        NetInput in;
        for (double& v : in.data) v = val(rng);
        std::fill(in.foreground.begin(), in.foreground.end(), 1);
        const NetInput s = row_stretch(in);
        for (std::size_t i = 0; i < in.data.size(); ++i) CHECK(std::abs(s.data[i] - in.data[i]) <= 1e-12);
    }
    SUBCASE("outputs stay within each row's foreground range") {
        std::bernoulli_distribution fg(0.4);
        for (int trial = 0; trial < 50; ++trial) {
            NetInput in;
            for (std::size_t i = 0; i < in.data.size(); ++i) {
                in.foreground[i] = fg(rng) ? 1 : 0;
                in.data[i] = in.foreground[i] ? val(rng) : 0.0;
            }
            const NetInput s = row_stretch(in);
            for (std::size_t y = 0; y < kNetSide; ++y) {
                double lo = INFINITY, hi = -INFINITY;
                for (std::size_t x = 0; x < kNetSide; ++x) {
                    if (in.foreground[y * kNetSide + x]) {
                        lo = std::min(lo, in.at(x, y));
                        hi = std::max(hi, in.at(x, y));
                    }
                }
                for (std::size_t x = 0; x < kNetSide; ++x) {
                    const double v = s.at(x, y);
                    CHECK(std::isfinite(v));
                    if (std::isfinite(lo)) {
                        CHECK(v >= lo - 1e-12);
                        CHECK(v <= hi + 1e-12);
                    } else {
                        CHECK(v == 0.0);
                    }
                }
            }
        }
    }
}

TEST_CASE("preprocess pipeline on a synthetic frame") {
    HeadModel model;
    const CameraIntrinsics cam{400, 400, 63.5, 63.5};
    const PoseLabel pose = pose_from_euler({10, -5, 20}, {5, -10, 1000});
    const Sample s = render_depth(model, pose, cam, 128, 128, 5);
    const PixelCoord c = project_to_pixel(pose.head_center_mm, cam);

    const NetInput normalized = preprocess_normalized(s.depth, cam, c, pose.head_center_mm[2]);
    CHECK(normalized.width == 64);
    CHECK(normalized.height == 64);
    const auto [mean, var] = masked_stats(normalized);
    CHECK(std::abs(mean) <= 1e-6);
    CHECK(std::abs(var - 1.0) <= 1e-6);

    const NetInput a = preprocess(s.depth, cam, c, pose.head_center_mm[2]);
    const NetInput b = preprocess(s.depth, cam, c, pose.head_center_mm[2]);
    CHECK(a == b);
    for (double v : a.data) CHECK(std::isfinite(v));

    SUBCASE("no foreground within the band") {
        CHECK_THROWS_AS(preprocess(s.depth, cam, c, 3000.0), DegenerateInputError);
    }
}
