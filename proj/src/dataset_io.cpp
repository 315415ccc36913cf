#include "hpe/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "hpe/error.hpp"

namespace hpe {

namespace fs = std::filesystem;

DepthFormat parse_depth_format(const std::string& name) {
    if (name == "biwi") return DepthFormat::kBiwi;
    if (name == "raw") return DepthFormat::kRaw;
    throw InvalidArgumentError("unknown depth format '" + name + "' (expected biwi or raw)");
}

std::string to_string(DepthFormat format) {
    return format == DepthFormat::kBiwi ? "biwi" : "raw";
}

namespace {

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t offset() const { return pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }

    std::uint16_t u16(const char* what) {
        need(2, what);
        const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

private:
    void need(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(std::string("truncated depth data while reading ") + what, pos_);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

// Frame dimensions beyond this are treated as corrupt headers.
constexpr std::uint32_t kMaxSide = 1 << 14;

void check_dims(std::int64_t w, std::int64_t h) {
    if (w <= 0 || h <= 0 || w > kMaxSide || h > kMaxSide) {
        throw FormatError("implausible frame size " + std::to_string(w) + "x" + std::to_string(h), 0);
    }
}

std::uint16_t quantize(const DepthMap& depth, std::size_t i, std::uint32_t max_value) {
    if (!depth.mask()[i]) return 0;
    const double v = std::round(depth.data()[i]);
    if (!(v >= 1.0) || v > max_value) {
        throw InvalidArgumentError("depth " + std::to_string(depth.data()[i]) +
                                   " mm cannot be stored as a 16-bit sample");
    }
    return static_cast<std::uint16_t>(v);
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_numbers(const std::string& text, const char* what) {
    std::vector<double> values;
    std::istringstream ss(text);
    std::string token;
    while (ss >> token) {
        double v = 0.0;
        const auto* first = token.data();
        const auto* last = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            throw ParseError(std::string("malformed number '") + token + "' in " + what);
        }
        values.push_back(v);
    }
    return values;
}

}  // namespace

DepthMap decode_biwi_depth(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const std::int64_t w = r.i32("width");
    const std::int64_t h = r.i32("height");
    check_dims(w, h);
    const auto total = static_cast<std::size_t>(w * h);
    DepthMap out(static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    auto data = out.data();
    auto mask = out.mask();

    std::size_t p = 0;
    while (p < total) {
        const std::uint64_t at = r.offset();
        const std::int64_t empty = r.i32("empty-run length");
        const std::int64_t full = r.i32("filled-run length");
        if (empty < 0 || full < 0 || static_cast<std::uint64_t>(empty + full) > total - p) {
            throw FormatError("run (" + std::to_string(empty) + " empty, " + std::to_string(full) +
                                  " filled) overruns the " + std::to_string(total) + "-pixel frame",
                              at);
        }
        if (empty == 0 && full == 0) {
            throw FormatError("zero-length run", at);
        }
        p += static_cast<std::size_t>(empty);
        for (std::int64_t i = 0; i < full; ++i, ++p) {
            const auto v = static_cast<std::int16_t>(r.u16("depth sample"));
            if (v > 0) {
                data[p] = v;
                mask[p] = 1;
            }
        }
    }
    if (!r.at_end()) {
        throw FormatError("trailing bytes after " + std::to_string(total) + " pixels", r.offset());
    }
    return out;
}

std::vector<std::uint8_t> encode_biwi_depth(const DepthMap& depth) {
    check_dims(static_cast<std::int64_t>(depth.width()), static_cast<std::int64_t>(depth.height()));
    std::vector<std::uint8_t> out;
    put_u32(out, static_cast<std::uint32_t>(depth.width()));
    put_u32(out, static_cast<std::uint32_t>(depth.height()));
    const std::size_t total = depth.size();
    std::vector<std::uint16_t> q(total);
    for (std::size_t i = 0; i < total; ++i) q[i] = quantize(depth, i, std::numeric_limits<std::int16_t>::max());

    std::size_t p = 0;
    while (p < total) {
        std::size_t empty = 0;
        while (p + empty < total && q[p + empty] == 0) ++empty;
        std::size_t full = 0;
        while (p + empty + full < total && q[p + empty + full] != 0) ++full;
        put_u32(out, static_cast<std::uint32_t>(empty));
        put_u32(out, static_cast<std::uint32_t>(full));
        for (std::size_t i = 0; i < full; ++i) put_u16(out, q[p + empty + i]);
        p += empty + full;
    }
    return out;
}

DepthMap load_biwi_depth(const fs::path& path) { return decode_biwi_depth(read_file(path)); }

void save_biwi_depth(const fs::path& path, const DepthMap& depth) { write_file(path, encode_biwi_depth(depth)); }

DepthMap decode_raw_depth(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const std::int64_t w = r.u32("width");
    const std::int64_t h = r.u32("height");
    check_dims(w, h);
    const auto total = static_cast<std::size_t>(w * h);
    if (bytes.size() != 8 + 2 * total) {
        throw FormatError("raw depth body holds " + std::to_string(bytes.size() - 8) + " bytes, expected " +
                              std::to_string(2 * total),
                          std::min<std::uint64_t>(bytes.size(), 8 + 2 * total));
    }
    DepthMap out(static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    auto data = out.data();
    auto mask = out.mask();
    for (std::size_t i = 0; i < total; ++i) {
        const std::uint16_t v = r.u16("depth sample");
        if (v != 0) {
            data[i] = v;
            mask[i] = 1;
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_raw_depth(const DepthMap& depth) {
    check_dims(static_cast<std::int64_t>(depth.width()), static_cast<std::int64_t>(depth.height()));
    std::vector<std::uint8_t> out;
    out.reserve(8 + 2 * depth.size());
    put_u32(out, static_cast<std::uint32_t>(depth.width()));
    put_u32(out, static_cast<std::uint32_t>(depth.height()));
    for (std::size_t i = 0; i < depth.size(); ++i) put_u16(out, quantize(depth, i, 65535));
    return out;
}

DepthMap load_raw_depth(const fs::path& path) { return decode_raw_depth(read_file(path)); }

void save_raw_depth(const fs::path& path, const DepthMap& depth) { write_file(path, encode_raw_depth(depth)); }

DepthMap load_depth(const fs::path& path, DepthFormat format) {
    return format == DepthFormat::kBiwi ? load_biwi_depth(path) : load_raw_depth(path);
}

void save_depth(const fs::path& path, const DepthMap& depth, DepthFormat format) {
    if (format == DepthFormat::kBiwi) {
        save_biwi_depth(path, depth);
    } else {
        save_raw_depth(path, depth);
    }
}

PoseLabel parse_pose(const std::string& text) {
    const auto v = parse_numbers(text, "pose file");
    if (v.size() != 12) {
        throw ParseError("pose file must hold 12 numbers (3x3 rotation + center), found " +
                         std::to_string(v.size()));
    }
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = v[i * 3 + j];
    return make_pose_label(r, {v[9], v[10], v[11]});
}

PoseLabel load_pose_file(const fs::path& path) {
    try {
        return parse_pose(read_text(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_pose_file(const fs::path& path, const PoseLabel& label) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    for (const auto& row : label.rotation) out << row[0] << ' ' << row[1] << ' ' << row[2] << '\n';
    out << '\n' << label.head_center_mm[0] << ' ' << label.head_center_mm[1] << ' ' << label.head_center_mm[2] << '\n';
}

CameraIntrinsics parse_calibration(const std::string& text) {
    const auto v = parse_numbers(text, "calibration file");
    if (v.size() < 9) {
        throw ParseError("calibration needs a 3x3 intrinsic matrix, found " + std::to_string(v.size()) +
                         " numbers");
    }
    CameraIntrinsics k{v[0], v[4], v[2], v[5]};
    k.validate();
    return k;
}

CameraIntrinsics load_calibration(const fs::path& path) { return parse_calibration(read_text(path)); }

void save_calibration(const fs::path& path, const CameraIntrinsics& k) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17) << k.fx << " 0 " << k.cx << '\n'
        << "0 " << k.fy << ' ' << k.cy << '\n'
        << "0 0 1\n";
}

std::string sequence_dir_name(int sequence_id) {
    std::ostringstream ss;
    ss << std::setw(2) << std::setfill('0') << sequence_id;
    return ss.str();
}

std::string depth_file_name(int frame_id, DepthFormat format) {
    std::ostringstream ss;
    ss << "frame_" << std::setw(5) << std::setfill('0') << frame_id << "_depth."
       << (format == DepthFormat::kBiwi ? "bin" : "raw");
    return ss.str();
}

std::string pose_file_name(int frame_id) {
    std::ostringstream ss;
    ss << "frame_" << std::setw(5) << std::setfill('0') << frame_id << "_pose.txt";
    return ss.str();
}

DatasetIndex index_dataset(const fs::path& root, DepthFormat format) {
    if (!fs::is_directory(root)) {
        throw ConfigError("dataset root " + root.string() + " is not a directory");
    }
    DatasetIndex index;
    index.root = root;
    index.format = format;
    const std::regex frame_re(format == DepthFormat::kBiwi ? R"(frame_(\d+)_depth\.bin)"
                                                           : R"(frame_(\d+)_depth\.raw)");
    const std::regex seq_re(R"(\d+)");

    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        if (!std::regex_match(name, seq_re)) continue;
        const int seq = std::stoi(name);
        const fs::path cal = entry.path() / kCalibrationFile;
        if (!fs::exists(cal)) {
            throw ConfigError("sequence " + name + " has no " + kCalibrationFile);
        }
        const CameraIntrinsics intrinsics = load_calibration(cal);
        for (const auto& f : fs::directory_iterator(entry.path())) {
            std::smatch m;
            const std::string fname = f.path().filename().string();
            if (!std::regex_match(fname, m, frame_re)) continue;
            FrameRecord rec;
            rec.sequence_id = seq;
            rec.frame_id = std::stoi(m[1].str());
            rec.depth_path = f.path();
            rec.pose_path = entry.path() / pose_file_name(rec.frame_id);
            rec.intrinsics = intrinsics;
            if (!fs::exists(rec.pose_path)) {
                throw ConfigError("frame " + f.path().string() + " has no pose annotation");
            }
            index.frames.push_back(std::move(rec));
        }
    }
    std::sort(index.frames.begin(), index.frames.end(), [](const FrameRecord& a, const FrameRecord& b) {
        return std::tie(a.sequence_id, a.frame_id) < std::tie(b.sequence_id, b.frame_id);
    });
    return index;
}

Sample load_sample(const FrameRecord& record, DepthFormat format) {
    Sample s;
    s.depth = load_depth(record.depth_path, format);
    s.label = load_pose_file(record.pose_path);
    s.intrinsics = record.intrinsics;
    s.sequence_id = record.sequence_id;
    s.subject_id = record.sequence_id;
    s.frame_id = record.frame_id;
    return s;
}

void write_dataset(const fs::path& root, std::span<const Sample> samples, DepthFormat format) {
    std::set<int> calibrated;
    for (const Sample& s : samples) {
        const fs::path dir = root / sequence_dir_name(s.sequence_id);
        if (calibrated.insert(s.sequence_id).second) {
            fs::create_directories(dir);
            save_calibration(dir / kCalibrationFile, s.intrinsics);
        }
        save_depth(dir / depth_file_name(s.frame_id, format), s.depth, format);
        save_pose_file(dir / pose_file_name(s.frame_id), s.label);
    }
}

Split make_split(const DatasetIndex& index, const SplitConfig& config) {
    std::set<int> present;
    for (const auto& f : index.frames) present.insert(f.sequence_id);
    std::vector<int> missing;
    for (int s = 1; s <= config.sequence_count; ++s) {
        if (!present.count(s)) missing.push_back(s);
    }
    for (int s : config.test_sequences) {
        if (!present.count(s) && std::find(missing.begin(), missing.end(), s) == missing.end()) missing.push_back(s);
    }
    if (!missing.empty()) {
        std::string list;
        for (int s : missing) list += (list.empty() ? "" : ", ") + sequence_dir_name(s);
        throw ConfigError("dataset is missing sequences: " + list);
    }
    const std::set<int> test(config.test_sequences.begin(), config.test_sequences.end());
    Split split;
    for (const auto& f : index.frames) {
        (test.count(f.sequence_id) ? split.test : split.train).push_back(f);
    }
    return split;
}

}  // namespace hpe
