#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hpe/depth_map.hpp"

namespace hpe {

inline constexpr std::size_t kNetSide = 64;
inline constexpr double kDefaultFaceWidthMm = 120.0;
inline constexpr double kDefaultForegroundBandMm = 150.0;

/// Axis-aligned crop rectangle in pixels. `x0`/`y0` is the top-left corner
/// and may be negative or extend past the frame; crop() masks such pixels.
struct CropWindow {
    long center_x = 0;
    long center_y = 0;
    long width = 0;
    long height = 0;

    long x0() const noexcept { return center_x - width / 2; }
    long y0() const noexcept { return center_y - height / 2; }
};

/// Network-ready image: normalized values plus the foreground mask.
struct NetInput {
    std::size_t width = kNetSide;
    std::size_t height = kNetSide;
    std::vector<double> data;
    std::vector<std::uint8_t> foreground;

    NetInput() : data(kNetSide * kNetSide, 0.0), foreground(kNetSide * kNetSide, 0) {}
    NetInput(std::size_t w, std::size_t h) : width(w), height(h), data(w * h, 0.0), foreground(w * h, 0) {}

    double& at(std::size_t x, std::size_t y) { return data[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return data[y * width + x]; }

    bool operator==(const NetInput&) const = default;
};

enum class StretchMode {
    /// Resample the foreground span [x_min, x_max] onto the full row.
    kForegroundSpan,
    /// Legacy sampling x_src = x / (w-1) * (x_max - x_min), anchored at column 0.
    kLegacyOrigin,
};

struct PrepConfig {
    double face_width_mm = kDefaultFaceWidthMm;
    double foreground_band_mm = kDefaultForegroundBandMm;
    StretchMode stretch = StretchMode::kForegroundSpan;
};

/// Window of size (fx*R/Z, fy*R/Z) rounded to whole pixels, centered on the head.
/// Throws InvalidDistanceError when distance_mm <= 0.
CropWindow compute_crop_window(const CameraIntrinsics& intrinsics, PixelCoord head_center_px,
                               double distance_mm, double face_width_mm = kDefaultFaceWidthMm);

/// Copies the window out of `depth`. Pixels of the window that fall outside
/// the frame are kept but marked invalid. Throws EmptyCropError when the
/// window misses the frame entirely.
DepthMap crop(const DepthMap& depth, const CropWindow& window);

/// Keeps only valid pixels within `band_mm` of `distance_mm`.
DepthMap segment_foreground(const DepthMap& depth, double distance_mm,
                            double band_mm = kDefaultForegroundBandMm);

/// Bilinear resample to an arbitrary size with pixel-center alignment. An
/// output pixel is valid iff every source pixel with nonzero weight is valid.
DepthMap resize_bilinear(const DepthMap& depth, std::size_t out_width, std::size_t out_height);

/// Bilinear resample to 64x64.
DepthMap resize_to_64(const DepthMap& depth);

/// Zero mean, unit population variance over the valid pixels. Invalid pixels
/// become 0 and are cleared in the foreground mask. Throws
/// DegenerateInputError for empty or constant foreground.
NetInput normalize(const DepthMap& depth);

/// Stretches one row so its foreground span fills the whole width.
/// Background pixels inside the span are bridged by linear interpolation
/// between their foreground neighbours before resampling.
void stretch_row(std::span<const double> row, std::span<const std::uint8_t> foreground,
                 std::span<double> out, StretchMode mode = StretchMode::kForegroundSpan);

/// Applies stretch_row to every row. Rows with no foreground become zero,
/// rows with one foreground pixel are filled with its value.
NetInput row_stretch(const NetInput& input, StretchMode mode = StretchMode::kForegroundSpan);

/// crop -> segment_foreground -> resize_to_64 -> normalize -> row_stretch.
NetInput preprocess(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                    PixelCoord head_center_px, double distance_mm, const PrepConfig& config = {});

/// Same pipeline without the final stretch (normalized stage only).
NetInput preprocess_normalized(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                               PixelCoord head_center_px, double distance_mm,
                               const PrepConfig& config = {});

}  // namespace hpe
