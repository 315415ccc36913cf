#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "hpe/dataset_io.hpp"
#include "hpe/pose.hpp"

namespace hpe {

struct Ellipsoid {
    Vec3 semi_axes_mm{};
    Vec3 offset_mm{};  // center in the head frame
};

/// Head proxy: a main ellipsoid plus a nose ellipsoid protruding toward the
/// camera. Head frame: x lateral, y vertical (down), z frontal (away from
/// the face), so the face looks along -z at the identity pose.
struct HeadModel {
    Ellipsoid head{{90.0, 120.0, 100.0}, {0.0, 0.0, 0.0}};
    Ellipsoid nose{{15.0, 25.0, 30.0}, {0.0, 10.0, -95.0}};
    double surface_noise_sigma_mm = 3.0;
    bool quantize_mm = true;  // round depths to whole millimeters like the sensor

    /// Throws InvalidArgumentError unless semi-axes are positive, the noise
    /// is non-negative and the nose tip lies in front of the head surface.
    void validate() const;
    /// Largest distance of any surface point from the head center.
    double extent_mm() const;
};

struct AngleRange {
    double min_deg = 0.0;
    double max_deg = 0.0;
};

struct SynthConfig {
    HeadModel model;
    std::size_t image_width = 128;
    std::size_t image_height = 128;
    CameraIntrinsics intrinsics{400.0, 400.0, 63.5, 63.5};
    AngleRange pitch{-60.0, 60.0};
    AngleRange roll{-50.0, 50.0};
    AngleRange yaw{-75.0, 75.0};
    AngleRange center_x_mm{-40.0, 40.0};
    AngleRange center_y_mm{-40.0, 40.0};
    AngleRange center_z_mm{900.0, 1100.0};
    int sequence_count = 24;  // samples are spread round-robin over sequences 1..N
};

/// Ray-casts the head at `pose` through a pinhole camera. Background pixels
/// are invalid. `rng` drives the surface noise only.
Sample render_depth(const HeadModel& model, const PoseLabel& pose, const CameraIntrinsics& intrinsics,
                    std::size_t width, std::size_t height, std::mt19937_64& rng);

/// Convenience overload with a fixed noise seed.
Sample render_depth(const HeadModel& model, const PoseLabel& pose, const CameraIntrinsics& intrinsics,
                    std::size_t width, std::size_t height, std::uint64_t noise_seed = 0);

/// Label whose Euler angles are exactly `deg` (the rotation is derived from them).
PoseLabel pose_from_euler(const EulerAngles& deg, const Vec3& head_center_mm);

/// `n` frames with poses drawn uniformly from the configured ranges.
std::vector<Sample> generate_dataset(std::size_t n, const SynthConfig& config, std::uint64_t seed);

}  // namespace hpe
