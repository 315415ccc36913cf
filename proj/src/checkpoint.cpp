// Checkpoint file layout: see docs/checkpoint_format.md.
#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hpe/error.hpp"
#include "hpe/posenet.hpp"

namespace hpe {

namespace {

constexpr char kMagic[8] = {'H', 'P', 'E', 'P', 'O', 'S', 'E', '\0'};
constexpr std::size_t kHeaderSize = 24;

class Writer {
public:
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    template <typename T>
    void scalar(T v) {
        if constexpr (sizeof(T) == 4) {
            u32(std::bit_cast<std::uint32_t>(v));
        } else {
            u64(std::bit_cast<std::uint64_t>(v));
        }
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    template <typename T>
    void tensor(const nn::Tensor<T>& t) {
        u32(static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) u64(d);
        for (T v : t.values()) scalar(v);
    }

    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::size_t base) : bytes_(bytes), base_(base) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    double stored_scalar(std::uint32_t width) {
        return width == 4 ? static_cast<double>(std::bit_cast<float>(u32())) : std::bit_cast<double>(u64());
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    template <typename T>
    void tensor_into(nn::Tensor<T>& t, std::uint32_t width) {
        const std::uint32_t rank = u32();
        nn::Shape shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(u64());
        if (shape != t.shape()) {
            throw CheckpointCorruptError("parameter shape " + nn::to_string(shape) + " does not match model " +
                                         nn::to_string(t.shape()));
        }
        for (T& v : t.values()) v = static_cast<T>(stored_scalar(width));
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) {
        if (bytes_.size() - pos_ < n) {
            throw CheckpointCorruptError("checkpoint payload truncated at byte " + std::to_string(base_ + pos_));
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        crc = crc32(crc, bytes.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(const PoseModel<T>& model) {
    Writer payload;
    payload.str(model.network.describe());
    payload.u8(model.options.output_tanh ? 1 : 0);
    payload.u64(model.init_seed);
    payload.u64(model.epoch);
    payload.u8(model.normalizer ? 1 : 0);
    const auto scales = model.normalizer ? model.normalizer->scale_deg : std::array<double, 3>{1, 1, 1};
    for (double s : scales) payload.f64(s);
    payload.f64(model.sgd.learning_rate);
    payload.f64(model.sgd.momentum);
    payload.f64(model.sgd.weight_decay);
    payload.u32(static_cast<std::uint32_t>(model.sgd.schedule.size()));
    for (const auto& step : model.sgd.schedule) {
        payload.u64(step.epoch);
        payload.f64(step.lr);
    }
    const auto params = model.network.parameters();
    payload.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
        payload.tensor(p->weights);
        payload.tensor(p->biases);
        payload.tensor(p->weight_velocity);
        payload.tensor(p->bias_velocity);
    }

    Writer file;
    file.bytes.assign(std::begin(kMagic), std::end(kMagic));
    file.u32(kCheckpointVersion);
    file.u32(sizeof(T));
    file.u64(payload.bytes.size());
    file.bytes.insert(file.bytes.end(), payload.bytes.begin(), payload.bytes.end());
    file.u32(checksum(payload.bytes));
    return std::move(file.bytes);
}

template <typename T>
PoseModel<T> deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw CheckpointCorruptError("not a checkpoint file (bad magic or truncated header)");
    }
    Reader header(bytes.subspan(8, kHeaderSize - 8), 8);
    const std::uint32_t version = header.u32();
    if (version != kCheckpointVersion) {
        throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                     " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint32_t width = header.u32();
    if (width != 4 && width != 8) {
        throw CheckpointCorruptError("unsupported scalar width " + std::to_string(width));
    }
    const std::uint64_t payload_size = header.u64();
    if (bytes.size() != kHeaderSize + payload_size + 4) {
        throw CheckpointCorruptError("checkpoint size " + std::to_string(bytes.size()) + " does not match header (" +
                                     std::to_string(kHeaderSize + payload_size + 4) + " expected)");
    }
    const auto payload = bytes.subspan(kHeaderSize, payload_size);
    Reader trailer(bytes.subspan(kHeaderSize + payload_size), kHeaderSize + payload_size);
    if (trailer.u32() != checksum(payload)) {
        throw CheckpointCorruptError("checkpoint checksum mismatch");
    }

    Reader r(payload, kHeaderSize);
    const std::string arch = r.str();
    ArchitectureOptions options;
    options.output_tanh = r.u8() != 0;
    const std::uint64_t seed = r.u64();
    PoseModel<T> model = build_model<T>(seed, options, std::nullopt);
    if (arch != model.network.describe()) {
        throw CheckpointCorruptError("checkpoint architecture does not match this build:\n" + arch);
    }
    model.epoch = r.u64();
    const bool has_normalizer = r.u8() != 0;
    AngleNormalizer norm;
    for (double& s : norm.scale_deg) s = r.f64();
    if (has_normalizer) {
        norm.validate();
        model.normalizer = norm;
    }
    model.sgd.learning_rate = r.f64();
    model.sgd.momentum = r.f64();
    model.sgd.weight_decay = r.f64();
    model.sgd.schedule.resize(r.u32());
    for (auto& step : model.sgd.schedule) {
        step.epoch = static_cast<std::size_t>(r.u64());
        step.lr = r.f64();
    }
    auto params = model.network.parameters();
    if (r.u32() != params.size()) throw CheckpointCorruptError("checkpoint parameter group count mismatch");
    for (auto* p : params) {
        r.tensor_into(p->weights, width);
        r.tensor_into(p->biases, width);
        r.tensor_into(p->weight_velocity, width);
        r.tensor_into(p->bias_velocity, width);
    }
    if (!r.at_end()) throw CheckpointCorruptError("unexpected bytes after checkpoint parameters");
    return model;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const PoseModel<T>& model) {
    const auto bytes = serialize_checkpoint(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

template <typename T>
PoseModel<T> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_checkpoint<T>(bytes);
}

template std::vector<std::uint8_t> serialize_checkpoint<float>(const PoseModel<float>&);
template std::vector<std::uint8_t> serialize_checkpoint<double>(const PoseModel<double>&);
template PoseModel<float> deserialize_checkpoint<float>(std::span<const std::uint8_t>);
template PoseModel<double> deserialize_checkpoint<double>(std::span<const std::uint8_t>);
template void save_checkpoint<float>(const std::filesystem::path&, const PoseModel<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const PoseModel<double>&);
template PoseModel<float> load_checkpoint<float>(const std::filesystem::path&);
template PoseModel<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace hpe
