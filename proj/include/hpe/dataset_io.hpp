#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hpe/depth_map.hpp"
#include "hpe/pose.hpp"

namespace hpe {

/// One annotated depth frame.
struct Sample {
    DepthMap depth;
    PoseLabel label;
    CameraIntrinsics intrinsics;
    int subject_id = 0;
    int sequence_id = 0;
    int frame_id = 0;
};

enum class DepthFormat {
    kBiwi,  // run-length encoded .bin
    kRaw,   // portable 16-bit grid
};

DepthFormat parse_depth_format(const std::string& name);
std::string to_string(DepthFormat format);

// --- Biwi run-length encoded depth -----------------------------------------
// Layout (little-endian): int32 width, int32 height, then repeated
// { int32 n_empty, int32 n_full, n_full * int16 depth_mm } until
// width*height pixels are covered. Zero depth marks an invalid pixel.

DepthMap decode_biwi_depth(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_biwi_depth(const DepthMap& depth);
DepthMap load_biwi_depth(const std::filesystem::path& path);
void save_biwi_depth(const std::filesystem::path& path, const DepthMap& depth);

// --- Portable raw depth ----------------------------------------------------
// Layout (little-endian): uint32 width, uint32 height, then width*height
// uint16 depth_mm in row-major order. Zero marks an invalid pixel.

DepthMap decode_raw_depth(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_raw_depth(const DepthMap& depth);
DepthMap load_raw_depth(const std::filesystem::path& path);
void save_raw_depth(const std::filesystem::path& path, const DepthMap& depth);

DepthMap load_depth(const std::filesystem::path& path, DepthFormat format);
void save_depth(const std::filesystem::path& path, const DepthMap& depth, DepthFormat format);

// --- Text annotations ------------------------------------------------------

/// Pose text: three rows of the rotation matrix followed by the head center
/// (x y z, millimeters); twelve whitespace-separated numbers.
PoseLabel parse_pose(const std::string& text);
PoseLabel load_pose_file(const std::filesystem::path& path);
void save_pose_file(const std::filesystem::path& path, const PoseLabel& label);

/// Calibration text: the 3x3 intrinsic matrix as its first nine numbers
/// (fx 0 cx / 0 fy cy / 0 0 1); anything after is ignored.
CameraIntrinsics parse_calibration(const std::string& text);
CameraIntrinsics load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CameraIntrinsics& intrinsics);

// --- Dataset layout --------------------------------------------------------
// <root>/<seq>/depth.cal
// <root>/<seq>/frame_<n>_depth.bin   (Biwi)   or   frame_<n>_depth.raw   (raw)
// <root>/<seq>/frame_<n>_pose.txt
// <seq> is a two-digit sequence number, <n> a five-digit frame number.

inline constexpr const char* kCalibrationFile = "depth.cal";

struct FrameRecord {
    int sequence_id = 0;
    int frame_id = 0;
    std::filesystem::path depth_path;
    std::filesystem::path pose_path;
    CameraIntrinsics intrinsics;
};

/// Lightweight index; frames are decoded lazily with load_sample().
struct DatasetIndex {
    std::filesystem::path root;
    DepthFormat format = DepthFormat::kBiwi;
    std::vector<FrameRecord> frames;
};

std::string sequence_dir_name(int sequence_id);
std::string depth_file_name(int frame_id, DepthFormat format);
std::string pose_file_name(int frame_id);

DatasetIndex index_dataset(const std::filesystem::path& root, DepthFormat format);
Sample load_sample(const FrameRecord& record, DepthFormat format);

/// Writes samples in the dataset layout, creating sequence directories.
void write_dataset(const std::filesystem::path& root, std::span<const Sample> samples, DepthFormat format);

struct SplitConfig {
    std::vector<int> test_sequences{1, 12};
    int sequence_count = 24;  // sequences 1..sequence_count must all be present
};

struct Split {
    std::vector<FrameRecord> train;
    std::vector<FrameRecord> test;
};

/// Partitions by sequence. Throws ConfigError naming any missing sequence.
Split make_split(const DatasetIndex& index, const SplitConfig& config = {});

}  // namespace hpe
