#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hpe {

/// Pinhole intrinsics of the depth sensor, in pixels.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    /// Throws InvalidArgumentError unless both focal lengths are positive.
    void validate() const;
};

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Row-major depth image in millimeters with a per-pixel validity mask.
/// Invalid pixels (sensor holes, background) never contribute to statistics.
class DepthMap {
public:
    DepthMap() = default;
    /// All pixels start at `fill` and invalid.
    DepthMap(std::size_t width, std::size_t height, double fill = 0.0);
    DepthMap(std::size_t width, std::size_t height, std::vector<double> data,
             std::vector<std::uint8_t> valid);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    double at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    bool valid(std::size_t x, std::size_t y) const { return valid_[y * width_ + x] != 0; }
    void set_valid(std::size_t x, std::size_t y, bool v) { valid_[y * width_ + x] = v ? 1 : 0; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<std::uint8_t> mask() noexcept { return valid_; }
    std::span<const std::uint8_t> mask() const noexcept { return valid_; }

    std::size_t valid_count() const noexcept;

    bool operator==(const DepthMap&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
    std::vector<std::uint8_t> valid_;
};

}  // namespace hpe
