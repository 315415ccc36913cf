#pragma once

#include <array>

#include "hpe/depth_map.hpp"

namespace hpe {

using Vec3 = std::array<double, 3>;
/// Row-major 3x3 matrix.
using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 identity3();
Mat3 multiply(const Mat3& a, const Mat3& b);
Mat3 transpose(const Mat3& m);
Vec3 multiply(const Mat3& m, const Vec3& v);
double determinant(const Mat3& m);

/// Elementary rotations; angles in radians. Camera frame: x lateral, y vertical, z frontal.
Mat3 rot_x(double rad);
Mat3 rot_y(double rad);
Mat3 rot_z(double rad);

/// Head rotation in degrees.
struct EulerAngles {
    double pitch = 0.0;  // about the lateral (x) axis
    double roll = 0.0;   // about the frontal (z) axis
    double yaw = 0.0;    // about the vertical (y) axis

    bool operator==(const EulerAngles&) const = default;
};

enum class EulerConvention {
    /// R = Ry(yaw) * Rx(pitch) * Rz(roll): intrinsic yaw, then pitch, then roll.
    kYawPitchRoll,
    /// R = Rz(roll) * Ry(yaw) * Rx(pitch). Singular at |yaw| = 90 deg.
    kRollYawPitch,
};

inline constexpr EulerConvention kEulerConvention = EulerConvention::kYawPitchRoll;

/// Distance in degrees from the singular middle angle at which a
/// decomposition is flagged degenerate.
inline constexpr double kGimbalMarginDeg = 0.5;

struct EulerDecomposition {
    EulerAngles angles;
    bool degenerate = false;  // middle angle within kGimbalMarginDeg of +-90 deg
};

Mat3 euler_to_rotation(const EulerAngles& deg, EulerConvention convention = kEulerConvention);
EulerDecomposition rotation_to_euler(const Mat3& rotation, EulerConvention convention = kEulerConvention);

/// True when R^T R = I and det R = 1, elementwise within `tol`.
bool is_rotation(const Mat3& m, double tol = 1e-3);

/// Ground-truth head pose. `euler_deg` is always derived from `rotation`.
struct PoseLabel {
    Mat3 rotation = identity3();
    Vec3 head_center_mm{0.0, 0.0, 0.0};
    EulerAngles euler_deg;
};

/// Builds a label, validating the matrix (tolerance 1e-3) and deriving the angles.
PoseLabel make_pose_label(const Mat3& rotation, const Vec3& head_center_mm,
                          EulerConvention convention = kEulerConvention);

/// Pinhole projection. Throws BehindCameraError when z <= 0.
PixelCoord project_to_pixel(const Vec3& point_mm, const CameraIntrinsics& intrinsics);

/// Per-angle scale mapping degrees onto [-1, 1].
struct AngleNormalizer {
    /// Order: pitch, roll, yaw. Defaults are the Biwi angle spans.
    std::array<double, 3> scale_deg{60.0, 50.0, 75.0};

    void validate() const;
    /// Divides by the scales; out-of-range results are clamped with a warning.
    std::array<double, 3> normalize(const EulerAngles& deg) const;
    EulerAngles denormalize(const std::array<double, 3>& unit) const;
};

inline std::array<double, 3> as_array(const EulerAngles& e) { return {e.pitch, e.roll, e.yaw}; }
inline EulerAngles from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace hpe
