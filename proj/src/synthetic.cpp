#include "hpe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hpe/error.hpp"
#include "hpe/seeds.hpp"

namespace hpe {

void HeadModel::validate() const {
    for (const Ellipsoid* e : {&head, &nose}) {
        for (double a : e->semi_axes_mm) {
            if (!(a > 0.0)) throw InvalidArgumentError("ellipsoid semi-axes must be positive");
        }
    }
    if (!(surface_noise_sigma_mm >= 0.0)) {
        throw InvalidArgumentError("surface noise sigma must be non-negative");
    }
    const double nose_tip = nose.offset_mm[2] - nose.semi_axes_mm[2];
    if (!(nose_tip < -head.semi_axes_mm[2])) {
        throw InvalidArgumentError("nose tip must protrude beyond the head front");
    }
}

double HeadModel::extent_mm() const {
    double r = 0.0;
    for (const Ellipsoid* e : {&head, &nose}) {
        const Vec3& o = e->offset_mm;
        const double center = std::sqrt(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]);
        r = std::max(r, center + *std::max_element(e->semi_axes_mm.begin(), e->semi_axes_mm.end()));
    }
    return r;
}

namespace {

// Nearest positive ray parameter t for the ray t*dir hitting the ellipsoid,
// given origin and direction already expressed in the ellipsoid's frame.
double intersect(const Vec3& origin, const Vec3& dir, const Vec3& semi) {
    double a = 0.0, b = 0.0, c = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double inv2 = 1.0 / (semi[i] * semi[i]);
        a += dir[i] * dir[i] * inv2;
        b += 2.0 * origin[i] * dir[i] * inv2;
        c += origin[i] * origin[i] * inv2;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double sq = std::sqrt(disc);
    const double t0 = (-b - sq) / (2.0 * a);
    const double t1 = (-b + sq) / (2.0 * a);
    if (t0 > 0.0) return t0;
    if (t1 > 0.0) return t1;
    return std::numeric_limits<double>::infinity();
}

}  // namespace

Sample render_depth(const HeadModel& model, const PoseLabel& pose, const CameraIntrinsics& intrinsics,
                    std::size_t width, std::size_t height, std::mt19937_64& rng) {
    model.validate();
    intrinsics.validate();
    if (width == 0 || height == 0) throw InvalidArgumentError("render size must be nonempty");
    if (!(pose.head_center_mm[2] > model.extent_mm())) {
        throw BehindCameraError("head center z=" + std::to_string(pose.head_center_mm[2]) +
                                " mm leaves part of the head at or behind the camera");
    }

    const Mat3& rot = pose.rotation;
    const Mat3 rot_t = transpose(rot);
    struct Part {
        Vec3 origin;  // camera origin in the part frame
        Vec3 semi;
    };
    std::vector<Part> parts;
    for (const Ellipsoid* e : {&model.head, &model.nose}) {
        const Vec3 off = multiply(rot, e->offset_mm);
        const Vec3 center{pose.head_center_mm[0] + off[0], pose.head_center_mm[1] + off[1],
                          pose.head_center_mm[2] + off[2]};
        parts.push_back({multiply(rot_t, Vec3{-center[0], -center[1], -center[2]}), e->semi_axes_mm});
    }

    std::normal_distribution<double> noise(0.0, model.surface_noise_sigma_mm);
    Sample s;
    s.depth = DepthMap(width, height);
    s.label = pose;
    s.intrinsics = intrinsics;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const Vec3 ray{(static_cast<double>(x) - intrinsics.cx) / intrinsics.fx,
                           (static_cast<double>(y) - intrinsics.cy) / intrinsics.fy, 1.0};
            const Vec3 dir = multiply(rot_t, ray);
            double t = std::numeric_limits<double>::infinity();
            for (const Part& p : parts) t = std::min(t, intersect(p.origin, dir, p.semi));
            if (!std::isfinite(t)) continue;
            // ray z component is 1, so the ray parameter is the depth.
            double z = t;
            if (model.surface_noise_sigma_mm > 0.0) z += noise(rng);
            if (model.quantize_mm) z = std::round(z);
            s.depth.at(x, y) = z;
            s.depth.set_valid(x, y, true);
        }
    }
    return s;
}

Sample render_depth(const HeadModel& model, const PoseLabel& pose, const CameraIntrinsics& intrinsics,
                    std::size_t width, std::size_t height, std::uint64_t noise_seed) {
    std::mt19937_64 rng(noise_seed);
    return render_depth(model, pose, intrinsics, width, height, rng);
}

PoseLabel pose_from_euler(const EulerAngles& deg, const Vec3& head_center_mm) {
    PoseLabel label;
    label.rotation = euler_to_rotation(deg);
    label.head_center_mm = head_center_mm;
    label.euler_deg = deg;
    return label;
}

std::vector<Sample> generate_dataset(std::size_t n, const SynthConfig& config, std::uint64_t seed) {
    if (n == 0) throw InvalidArgumentError("synthetic dataset size must be positive");
    if (config.sequence_count <= 0) throw InvalidArgumentError("sequence count must be positive");
    std::mt19937_64 pose_rng(derive_seed(seed, SeedStream::kPose));
    auto draw = [&](const AngleRange& r) {
        return std::uniform_real_distribution<double>(r.min_deg, r.max_deg)(pose_rng);
    };

    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        EulerAngles e;
        e.pitch = draw(config.pitch);
        e.roll = draw(config.roll);
        e.yaw = draw(config.yaw);
        const Vec3 center{draw(config.center_x_mm), draw(config.center_y_mm), draw(config.center_z_mm)};
        std::mt19937_64 noise_rng(derive_seed(seed, SeedStream::kNoise, i));
        Sample s = render_depth(config.model, pose_from_euler(e, center), config.intrinsics, config.image_width,
                                config.image_height, noise_rng);
        s.sequence_id = static_cast<int>(i % static_cast<std::size_t>(config.sequence_count)) + 1;
        s.subject_id = s.sequence_id;
        s.frame_id = static_cast<int>(i / static_cast<std::size_t>(config.sequence_count));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace hpe
