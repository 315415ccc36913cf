#include "hpe/depth_map.hpp"

#include <algorithm>
#include <string>

#include "hpe/error.hpp"

namespace hpe {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw InvalidArgumentError("camera focal lengths must be positive, got fx=" +
                                   std::to_string(fx) + " fy=" + std::to_string(fy));
    }
}

DepthMap::DepthMap(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill), valid_(width * height, 0) {}

DepthMap::DepthMap(std::size_t width, std::size_t height, std::vector<double> data,
                   std::vector<std::uint8_t> valid)
    : width_(width), height_(height), data_(std::move(data)), valid_(std::move(valid)) {
    if (data_.size() != width * height || valid_.size() != width * height) {
        throw InvalidArgumentError("depth map buffers do not match " + std::to_string(width) + "x" +
                                   std::to_string(height));
    }
}

std::size_t DepthMap::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(valid_.begin(), valid_.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

}  // namespace hpe
