#include "hpe/posenet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hpe/error.hpp"
#include "hpe/nn/loss.hpp"
#include "hpe/seeds.hpp"

namespace hpe {

using nn::Conv2d;
using nn::Flatten;
using nn::Linear;
using nn::MaxPool2x2;
using nn::Tanh;

template <typename T>
nn::Sequential<T> build_network(std::uint64_t init_seed, const ArchitectureOptions& options) {
    nn::Sequential<T> net({1, kNetSide, kNetSide});
    net.template emplace<Conv2d<T>>(1, 30, 5);  // 30x60x60
    net.template emplace<Tanh<T>>();
    net.template emplace<MaxPool2x2<T>>();  // 30x30x30
    net.template emplace<Conv2d<T>>(30, 30, 3);  // 30x28x28
    net.template emplace<Tanh<T>>();
    net.template emplace<MaxPool2x2<T>>();  // 30x14x14
    net.template emplace<Conv2d<T>>(30, 30, 3);  // 30x12x12
    net.template emplace<Tanh<T>>();
    net.template emplace<MaxPool2x2<T>>();  // 30x6x6
    net.template emplace<Conv2d<T>>(30, 30, 4);  // 30x3x3
    net.template emplace<Tanh<T>>();
    net.template emplace<Conv2d<T>>(30, 120, 3);  // 120x1x1
    net.template emplace<Tanh<T>>();
    net.template emplace<Flatten<T>>();
    net.template emplace<Linear<T>>(120, 120);
    net.template emplace<Tanh<T>>();
    net.template emplace<Linear<T>>(120, 84);
    net.template emplace<Tanh<T>>();
    net.template emplace<Linear<T>>(84, 3);
    if (options.output_tanh) net.template emplace<Tanh<T>>();

    std::mt19937_64 rng(derive_seed(init_seed, SeedStream::kInit));
    net.initialize(rng);
    return net;
}

template <typename T>
PoseModel<T> build_model(std::uint64_t init_seed, const ArchitectureOptions& options,
                         std::optional<AngleNormalizer> normalizer) {
    if (normalizer) normalizer->validate();
    PoseModel<T> model(build_network<T>(init_seed, options), options, init_seed);
    model.normalizer = normalizer;
    return model;
}

template <typename T>
nn::Tensor<T> to_tensor(const NetInput& input) {
    nn::Tensor<T> t({1, input.height, input.width});
    for (std::size_t i = 0; i < input.data.size(); ++i) t[i] = static_cast<T>(input.data[i]);
    return t;
}

template <typename T>
std::array<double, 3> forward_raw(const PoseModel<T>& model, const NetInput& input) {
    const nn::Tensor<T> out = model.network.infer(to_tensor<T>(input));
    return {static_cast<double>(out[0]), static_cast<double>(out[1]), static_cast<double>(out[2])};
}

template <typename T>
EulerAngles predict(const PoseModel<T>& model, const NetInput& input) {
    if (!model.normalizer) {
        throw ConfigError("model has no angle normalizer; cannot convert outputs to degrees");
    }
    return model.normalizer->denormalize(forward_raw(model, input));
}

namespace {

std::array<double, 3> scales_of(const std::optional<AngleNormalizer>& n) {
    return n ? n->scale_deg : std::array<double, 3>{1.0, 1.0, 1.0};
}

}  // namespace

template <typename T>
EpochMetrics measure(const PoseModel<T>& model, std::span<const TrainExample> examples) {
    EpochMetrics m;
    if (examples.empty()) return m;
    const auto scale = scales_of(model.normalizer);
    double loss = 0.0;
    std::array<double, 3> mae{};
    for (const TrainExample& ex : examples) {
        const auto out = forward_raw(model, ex.input);
        for (int a = 0; a < 3; ++a) {
            const double d = out[a] - ex.target[a];
            loss += d * d;
            mae[a] += std::abs(d) * scale[a];
        }
    }
    const auto n = static_cast<double>(examples.size());
    m.train_loss = loss / n;
    for (int a = 0; a < 3; ++a) m.train_mae_deg[a] = mae[a] / n;
    return m;
}

template <typename T>
TrainResult train(PoseModel<T>& model, std::span<const TrainExample> train_set,
                  std::span<const TrainExample> validation_set, const TrainConfig& config) {
    if (train_set.empty()) throw InvalidArgumentError("training set is empty");
    if (config.batch_size == 0) throw ConfigError("batch size must be positive");
    config.sgd.validate();
    model.sgd = config.sgd;

    const std::size_t n = train_set.size();
    const auto scale = scales_of(model.normalizer);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, SeedStream::kShuffle));
    auto params = model.network.parameters();
    model.network.zero_grads();

    TrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const double lr = config.sgd.lr_at(epoch);

        double loss_sum = 0.0;
        std::array<double, 3> abs_err{};
        for (std::size_t start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
            const std::size_t count = std::min(config.batch_size, n - start);
            const T grad_scale = config.average_batch_gradient ? T{1} / static_cast<T>(count) : T{1};
            for (std::size_t j = 0; j < count; ++j) {
                const std::size_t idx = order[start + j];
                const TrainExample& ex = train_set[idx];
                const NetInput* input = &ex.input;
                NetInput variant;
                if (config.augment) {
                    const std::uint64_t s = derive_seed(config.seed, SeedStream::kAugment, epoch * n + idx);
                    const std::size_t pick = s % (kAugmentCount + 1);
                    if (pick < kAugmentCount) {
                        variant = augment_variant(ex.input, static_cast<AugmentKind>(pick), mix64(s),
                                                  config.augment_config);
                        input = &variant;
                    }
                }
                const nn::Tensor<T> out = model.network.forward(to_tensor<T>(*input));
                nn::Tensor<T> target({3});
                for (int a = 0; a < 3; ++a) target[a] = static_cast<T>(ex.target[a]);
                auto loss = nn::l2_loss(out, target);
                if (!std::isfinite(static_cast<double>(loss.value))) {
                    std::ostringstream ss;
                    ss << "non-finite loss at epoch " << epoch << ", batch " << batch << ", lr " << lr;
                    throw DivergenceError(ss.str());
                }
                loss_sum += static_cast<double>(loss.value);
                for (int a = 0; a < 3; ++a) {
                    abs_err[a] += std::abs(static_cast<double>(out[a] - target[a])) * scale[a];
                }
                for (T& g : loss.grad.values()) g *= grad_scale;
                model.network.backward(loss.grad);
            }
            nn::sgd_step<T>(params, config.sgd, epoch);
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.learning_rate = lr;
        m.train_loss = loss_sum / static_cast<double>(n);
        for (int a = 0; a < 3; ++a) m.train_mae_deg[a] = abs_err[a] / static_cast<double>(n);
        if (!validation_set.empty()) {
            const EpochMetrics v = measure(model, validation_set);
            m.val_loss = v.train_loss;
            m.val_mae_deg = v.train_mae_deg;
        }
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        model.epoch = epoch + 1;
        result.history.push_back(m);
        if (config.on_epoch) config.on_epoch(m);
        if (config.stop_below_loss > 0.0 && m.train_loss < config.stop_below_loss) break;
    }
    return result;
}

#define HPE_INSTANTIATE(T)                                                                                    \
    template nn::Sequential<T> build_network<T>(std::uint64_t, const ArchitectureOptions&);                 \
    template PoseModel<T> build_model<T>(std::uint64_t, const ArchitectureOptions&,                         \
                                         std::optional<AngleNormalizer>);                                   \
    template nn::Tensor<T> to_tensor<T>(const NetInput&);                                                    \
    template std::array<double, 3> forward_raw<T>(const PoseModel<T>&, const NetInput&);                    \
    template EulerAngles predict<T>(const PoseModel<T>&, const NetInput&);                                  \
    template EpochMetrics measure<T>(const PoseModel<T>&, std::span<const TrainExample>);                   \
    template TrainResult train<T>(PoseModel<T>&, std::span<const TrainExample>, std::span<const TrainExample>, \
                                  const TrainConfig&);

HPE_INSTANTIATE(float)
HPE_INSTANTIATE(double)

#undef HPE_INSTANTIATE

}  // namespace hpe
