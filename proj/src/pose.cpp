#include "hpe/pose.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

#include "hpe/error.hpp"

namespace hpe {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double to_rad(double deg) { return deg / kDegPerRad; }
double to_deg(double rad) { return rad * kDegPerRad; }

}  // namespace

Mat3 identity3() { return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Mat3 multiply(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    return r;
}

Mat3 transpose(const Mat3& m) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = m[j][i];
    return r;
}

Vec3 multiply(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

double determinant(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 rot_x(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return Mat3{{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}

Mat3 rot_y(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return Mat3{{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Mat3 rot_z(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return Mat3{{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

Mat3 euler_to_rotation(const EulerAngles& deg, EulerConvention convention) {
    const Mat3 rx = rot_x(to_rad(deg.pitch));
    const Mat3 ry = rot_y(to_rad(deg.yaw));
    const Mat3 rz = rot_z(to_rad(deg.roll));
    switch (convention) {
        case EulerConvention::kYawPitchRoll:
            return multiply(ry, multiply(rx, rz));
        case EulerConvention::kRollYawPitch:
            return multiply(rz, multiply(ry, rx));
    }
    throw InvalidArgumentError("unknown Euler convention");
}

EulerDecomposition rotation_to_euler(const Mat3& r, EulerConvention convention) {
    EulerDecomposition out;
    double middle_sin = 0.0;
    switch (convention) {
        case EulerConvention::kYawPitchRoll:
            // r12 = -sin(pitch); yaw from (r02, r22); roll from (r10, r11).
            middle_sin = std::clamp(-r[1][2], -1.0, 1.0);
            out.angles.pitch = to_deg(std::asin(middle_sin));
            out.angles.yaw = to_deg(std::atan2(r[0][2], r[2][2]));
            out.angles.roll = to_deg(std::atan2(r[1][0], r[1][1]));
            break;
        case EulerConvention::kRollYawPitch:
            // r20 = -sin(yaw); pitch from (r21, r22); roll from (r10, r00).
            middle_sin = std::clamp(-r[2][0], -1.0, 1.0);
            out.angles.yaw = to_deg(std::asin(middle_sin));
            out.angles.pitch = to_deg(std::atan2(r[2][1], r[2][2]));
            out.angles.roll = to_deg(std::atan2(r[1][0], r[0][0]));
            break;
    }
    out.degenerate = 90.0 - std::abs(to_deg(std::asin(middle_sin))) < kGimbalMarginDeg;
    return out;
}

bool is_rotation(const Mat3& m, double tol) {
    const Mat3 g = multiply(transpose(m), m);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double expect = i == j ? 1.0 : 0.0;
            if (!(std::abs(g[i][j] - expect) <= tol)) return false;
        }
    return std::abs(determinant(m) - 1.0) <= tol;
}

PoseLabel make_pose_label(const Mat3& rotation, const Vec3& head_center_mm, EulerConvention convention) {
    if (!is_rotation(rotation)) {
        throw ParseError("pose matrix is not a proper rotation (tolerance 1e-3)");
    }
    PoseLabel label;
    label.rotation = rotation;
    label.head_center_mm = head_center_mm;
    label.euler_deg = rotation_to_euler(rotation, convention).angles;
    return label;
}

PixelCoord project_to_pixel(const Vec3& p, const CameraIntrinsics& k) {
    if (!(p[2] > 0.0)) {
        throw BehindCameraError("point z=" + std::to_string(p[2]) + " mm is not in front of the camera");
    }
    return {k.fx * p[0] / p[2] + k.cx, k.fy * p[1] / p[2] + k.cy};
}

void AngleNormalizer::validate() const {
    for (double s : scale_deg) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw InvalidArgumentError("angle normalizer scales must be positive and finite");
        }
    }
}

std::array<double, 3> AngleNormalizer::normalize(const EulerAngles& deg) const {
    static constexpr const char* kNames[3] = {"pitch", "roll", "yaw"};
    const auto in = as_array(deg);
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = in[i] / scale_deg[i];
        if (out[i] > 1.0 || out[i] < -1.0) {
            std::clog << "warning: " << kNames[i] << " " << in[i] << " deg exceeds +-" << scale_deg[i]
                      << " deg; clamped\n";
            out[i] = std::clamp(out[i], -1.0, 1.0);
        }
    }
    return out;
}

EulerAngles AngleNormalizer::denormalize(const std::array<double, 3>& unit) const {
    return {unit[0] * scale_deg[0], unit[1] * scale_deg[1], unit[2] * scale_deg[2]};
}

}  // namespace hpe
