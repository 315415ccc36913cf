#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hpe/nn/layers.hpp"

namespace hpe::nn {

/// Learning rate `lr` applies from epoch `epoch` (0-based) onward.
struct LrStep {
    std::size_t epoch = 0;
    double lr = 0.0;
    bool operator==(const LrStep&) const = default;
};

struct SgdConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::vector<LrStep> schedule;

    /// Throws ConfigError on non-positive rates, momentum outside [0,1),
    /// negative decay or non-increasing schedule epochs.
    void validate() const;
    double lr_at(std::size_t epoch) const;

    bool operator==(const SgdConfig&) const = default;
};

/// Drops the rate tenfold at 80% and again at 90% of `epochs`.
std::vector<LrStep> step_schedule(double base_lr, std::size_t epochs);

/// v <- momentum*v - lr*(g + decay*w); w <- w + v; then clears the gradients.
template <typename T>
void sgd_step(std::span<LayerParams<T>* const> params, const SgdConfig& config, std::size_t epoch);

extern template void sgd_step<float>(std::span<LayerParams<float>* const>, const SgdConfig&, std::size_t);
extern template void sgd_step<double>(std::span<LayerParams<double>* const>, const SgdConfig&, std::size_t);

}  // namespace hpe::nn
