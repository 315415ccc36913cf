#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpe/augment.hpp"
#include "hpe/depth_prep.hpp"
#include "hpe/nn/layers.hpp"
#include "hpe/nn/sgd.hpp"
#include "hpe/pose.hpp"

namespace hpe {

struct ArchitectureOptions {
    bool output_tanh = true;  // squash the 3 outputs into (-1, 1)
    bool operator==(const ArchitectureOptions&) const = default;
};

/// 64x64x1 -> conv5x5x30 -> tanh -> pool -> conv3x3x30 -> tanh -> pool
///   -> conv3x3x30 -> tanh -> pool -> conv4x4x30 -> tanh -> conv3x3x120 -> tanh
///   -> flatten -> fc120 -> tanh -> fc84 -> tanh -> fc3 [-> tanh]
template <typename T>
nn::Sequential<T> build_network(std::uint64_t init_seed, const ArchitectureOptions& options = {});

/// Trainable regressor plus everything needed to reproduce or resume it.
template <typename T>
struct PoseModel {
    nn::Sequential<T> network;
    ArchitectureOptions options;
    std::optional<AngleNormalizer> normalizer;
    nn::SgdConfig sgd;
    std::uint64_t init_seed = 0;
    std::uint64_t epoch = 0;  // completed training epochs

    PoseModel(nn::Sequential<T> net, ArchitectureOptions opts, std::uint64_t seed)
        : network(std::move(net)), options(opts), init_seed(seed) {}
};

template <typename T>
PoseModel<T> build_model(std::uint64_t init_seed, const ArchitectureOptions& options = {},
                         std::optional<AngleNormalizer> normalizer = AngleNormalizer{});

/// [1,64,64] tensor view of a preprocessed image.
template <typename T>
nn::Tensor<T> to_tensor(const NetInput& input);

/// Raw network output (normalized angle units).
template <typename T>
std::array<double, 3> forward_raw(const PoseModel<T>& model, const NetInput& input);

/// Forward pass and denormalization. Throws ConfigError without a normalizer.
template <typename T>
EulerAngles predict(const PoseModel<T>& model, const NetInput& input);

// --- Training --------------------------------------------------------------

struct TrainExample {
    NetInput input;
    std::array<double, 3> target{};  // normalized (pitch, roll, yaw)
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double learning_rate = 0.0;
    double train_loss = 0.0;  // mean per-sample squared error, normalized units
    double val_loss = 0.0;
    std::array<double, 3> train_mae_deg{};
    std::array<double, 3> val_mae_deg{};
    double seconds = 0.0;
};

struct TrainConfig {
    nn::SgdConfig sgd;
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    bool augment = true;
    AugmentConfig augment_config;
    /// Scale accumulated gradients by 1/batch before the update.
    bool average_batch_gradient = true;
    std::uint64_t seed = 0;
    /// Stop once the epoch's train loss falls below this value (0 disables).
    double stop_below_loss = 0.0;
    std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
    std::vector<EpochMetrics> history;
};

/// Minibatch SGD on the summed L2 loss. Shuffles every epoch; with
/// augmentation on, each sample is replaced by one of its ten variants or
/// kept as is, uniformly at random. Throws DivergenceError on a non-finite loss.
template <typename T>
TrainResult train(PoseModel<T>& model, std::span<const TrainExample> train_set,
                  std::span<const TrainExample> validation_set, const TrainConfig& config);

/// Mean per-sample loss and per-angle MAE (degrees) without updating weights.
template <typename T>
EpochMetrics measure(const PoseModel<T>& model, std::span<const TrainExample> examples);

// --- Checkpoints -----------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(const PoseModel<T>& model);
template <typename T>
PoseModel<T> deserialize_checkpoint(std::span<const std::uint8_t> bytes);

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const PoseModel<T>& model);
template <typename T>
PoseModel<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace hpe
