#include "hpe/depth_prep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hpe/error.hpp"

namespace hpe {

CropWindow compute_crop_window(const CameraIntrinsics& intrinsics, PixelCoord head_center_px,
                               double distance_mm, double face_width_mm) {
    intrinsics.validate();
    if (!(distance_mm > 0.0) || !std::isfinite(distance_mm)) {
        throw InvalidDistanceError("head distance must be positive, got " + std::to_string(distance_mm));
    }
    if (!(face_width_mm > 0.0)) {
        throw InvalidArgumentError("face width must be positive, got " + std::to_string(face_width_mm));
    }
    CropWindow w;
    w.center_x = std::lround(head_center_px.u);
    w.center_y = std::lround(head_center_px.v);
    w.width = std::max(1L, std::lround(intrinsics.fx * face_width_mm / distance_mm));
    w.height = std::max(1L, std::lround(intrinsics.fy * face_width_mm / distance_mm));
    return w;
}

DepthMap crop(const DepthMap& depth, const CropWindow& window) {
    if (window.width <= 0 || window.height <= 0) {
        throw EmptyCropError("crop window has non-positive size");
    }
    const long x0 = window.x0();
    const long y0 = window.y0();
    const long img_w = static_cast<long>(depth.width());
    const long img_h = static_cast<long>(depth.height());
    if (x0 >= img_w || y0 >= img_h || x0 + window.width <= 0 || y0 + window.height <= 0) {
        throw EmptyCropError("crop window [" + std::to_string(x0) + "," + std::to_string(y0) + "]+" +
                             std::to_string(window.width) + "x" + std::to_string(window.height) +
                             " does not intersect the " + std::to_string(img_w) + "x" +
                             std::to_string(img_h) + " frame");
    }

    DepthMap out(static_cast<std::size_t>(window.width), static_cast<std::size_t>(window.height));
    for (long y = 0; y < window.height; ++y) {
        const long sy = y0 + y;
        if (sy < 0 || sy >= img_h) continue;
        for (long x = 0; x < window.width; ++x) {
            const long sx = x0 + x;
            if (sx < 0 || sx >= img_w) continue;
            const auto ux = static_cast<std::size_t>(x);
            const auto uy = static_cast<std::size_t>(y);
            out.at(ux, uy) = depth.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
            out.set_valid(ux, uy, depth.valid(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy)));
        }
    }
    return out;
}

DepthMap segment_foreground(const DepthMap& depth, double distance_mm, double band_mm) {
    if (!(band_mm > 0.0)) {
        throw InvalidArgumentError("foreground band must be positive, got " + std::to_string(band_mm));
    }
    DepthMap out = depth;
    auto values = out.data();
    auto mask = out.mask();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool keep = mask[i] != 0 && std::abs(values[i] - distance_mm) <= band_mm;
        mask[i] = keep ? 1 : 0;
    }
    return out;
}

namespace {

struct Tap {
    std::size_t lo;
    std::size_t hi;
    double frac;  // weight of `hi`
};

// Pixel-center aligned source coordinate for output index `i`.
Tap make_tap(std::size_t i, std::size_t src_len, std::size_t dst_len) {
    double s = (static_cast<double>(i) + 0.5) * static_cast<double>(src_len) /
                   static_cast<double>(dst_len) -
               0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    const auto lo = static_cast<std::size_t>(std::floor(s));
    const std::size_t hi = std::min(lo + 1, src_len - 1);
    const double frac = hi == lo ? 0.0 : s - static_cast<double>(lo);
    return {lo, hi, frac};
}

}  // namespace

DepthMap resize_bilinear(const DepthMap& depth, std::size_t out_width, std::size_t out_height) {
    if (depth.empty()) {
        throw InvalidArgumentError("cannot resize an empty depth map");
    }
    if (out_width == 0 || out_height == 0) {
        throw InvalidArgumentError("resize target must be nonempty");
    }
    std::vector<Tap> xs(out_width), ys(out_height);
    for (std::size_t x = 0; x < out_width; ++x) xs[x] = make_tap(x, depth.width(), out_width);
    for (std::size_t y = 0; y < out_height; ++y) ys[y] = make_tap(y, depth.height(), out_height);

    DepthMap out(out_width, out_height);
    for (std::size_t y = 0; y < out_height; ++y) {
        const Tap ty = ys[y];
        for (std::size_t x = 0; x < out_width; ++x) {
            const Tap tx = xs[x];
            const std::size_t cols[2] = {tx.lo, tx.hi};
            const std::size_t rows[2] = {ty.lo, ty.hi};
            const double wx[2] = {1.0 - tx.frac, tx.frac};
            const double wy[2] = {1.0 - ty.frac, ty.frac};
            double acc = 0.0;
            bool ok = true;
            for (int j = 0; j < 2 && ok; ++j) {
                if (wy[j] == 0.0) continue;
                for (int i = 0; i < 2; ++i) {
                    const double w = wx[i] * wy[j];
                    if (w == 0.0) continue;
                    if (!depth.valid(cols[i], rows[j])) {
                        ok = false;
                        break;
                    }
                    acc += w * depth.at(cols[i], rows[j]);
                }
            }
            if (ok) {
                out.at(x, y) = acc;
                out.set_valid(x, y, true);
            }
        }
    }
    return out;
}

DepthMap resize_to_64(const DepthMap& depth) {
    return resize_bilinear(depth, kNetSide, kNetSide);
}

NetInput normalize(const DepthMap& depth) {
    const auto values = depth.data();
    const auto mask = depth.mask();

    std::size_t n = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) {
            sum += values[i];
            ++n;
        }
    }
    if (n < 2) {
        throw DegenerateInputError("normalization needs at least 2 valid pixels, found " + std::to_string(n));
    }
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) {
            const double d = values[i] - mean;
            sq += d * d;
        }
    }
    const double stddev = std::sqrt(sq / static_cast<double>(n));
    if (!(stddev > 1e-12 * std::max(1.0, std::abs(mean))) || !std::isfinite(stddev)) {
        throw DegenerateInputError("foreground is constant; cannot normalize variance");
    }

    NetInput out(depth.width(), depth.height());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) {
            out.data[i] = (values[i] - mean) / stddev;
            out.foreground[i] = 1;
        }
    }
    return out;
}

void stretch_row(std::span<const double> row, std::span<const std::uint8_t> foreground,
                 std::span<double> out, StretchMode mode) {
    const std::size_t w = row.size();
    if (foreground.size() != w || out.size() != w) {
        throw InvalidArgumentError("stretch_row: row, mask and output lengths differ");
    }
    std::size_t first = w;
    std::size_t last = 0;
    std::size_t count = 0;
    for (std::size_t x = 0; x < w; ++x) {
        if (foreground[x]) {
            first = std::min(first, x);
            last = x;
            ++count;
        }
    }
    if (count == 0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (count == 1) {
        std::fill(out.begin(), out.end(), row[first]);
        return;
    }

    std::vector<double> src(row.begin(), row.end());
    if (mode == StretchMode::kForegroundSpan) {
        // Bridge holes inside the span so only foreground values are sampled.
        std::size_t prev = first;
        for (std::size_t x = first + 1; x <= last; ++x) {
            if (!foreground[x]) continue;
            if (x > prev + 1) {
                const double a = row[prev];
                const double b = row[x];
                const double span = static_cast<double>(x - prev);
                for (std::size_t k = prev + 1; k < x; ++k) {
                    const double t = static_cast<double>(k - prev) / span;
                    src[k] = a * (1.0 - t) + b * t;
                }
            }
            prev = x;
        }
    }

    const double origin = mode == StretchMode::kForegroundSpan ? static_cast<double>(first) : 0.0;
    const double extent = static_cast<double>(last - first);
    const double denom = static_cast<double>(w - 1);
    for (std::size_t x = 0; x < w; ++x) {
        const double xs = origin + static_cast<double>(x) * extent / denom;
        const auto x1 = static_cast<std::size_t>(std::floor(xs));
        const std::size_t x2 = x1 + 1;
        if (x2 <= w - 1) {
            const double lambda = static_cast<double>(x2) - xs;
            out[x] = src[x1] * lambda + src[x2] * (1.0 - lambda);
        } else {
            out[x] = src[x1];
        }
    }
}

NetInput row_stretch(const NetInput& input, StretchMode mode) {
    NetInput out(input.width, input.height);
    const std::size_t w = input.width;
    for (std::size_t y = 0; y < input.height; ++y) {
        std::span<const double> row(input.data.data() + y * w, w);
        std::span<const std::uint8_t> fg(input.foreground.data() + y * w, w);
        std::span<double> dst(out.data.data() + y * w, w);
        stretch_row(row, fg, dst, mode);
        const bool any = std::any_of(fg.begin(), fg.end(), [](std::uint8_t v) { return v != 0; });
        std::fill_n(out.foreground.begin() + static_cast<std::ptrdiff_t>(y * w), w, any ? 1 : 0);
    }
    return out;
}

NetInput preprocess_normalized(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                               PixelCoord head_center_px, double distance_mm, const PrepConfig& config) {
    const CropWindow window = compute_crop_window(intrinsics, head_center_px, distance_mm, config.face_width_mm);
    const DepthMap patch = crop(depth, window);
    const DepthMap face = segment_foreground(patch, distance_mm, config.foreground_band_mm);
    return normalize(resize_to_64(face));
}

NetInput preprocess(const DepthMap& depth, const CameraIntrinsics& intrinsics, PixelCoord head_center_px,
                    double distance_mm, const PrepConfig& config) {
    return row_stretch(preprocess_normalized(depth, intrinsics, head_center_px, distance_mm, config),
                       config.stretch);
}

}  // namespace hpe
