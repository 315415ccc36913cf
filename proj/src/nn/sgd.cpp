#include "hpe/nn/sgd.hpp"

#include <cmath>
#include <string>

namespace hpe::nn {

void SgdConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i].lr > 0.0)) throw ConfigError("schedule learning rates must be positive");
        if (i > 0 && schedule[i].epoch <= schedule[i - 1].epoch) {
            throw ConfigError("schedule epochs must be strictly increasing");
        }
    }
}

double SgdConfig::lr_at(std::size_t epoch) const {
    double lr = learning_rate;
    for (const LrStep& s : schedule) {
        if (s.epoch <= epoch) lr = s.lr;
    }
    return lr;
}

std::vector<LrStep> step_schedule(double base_lr, std::size_t epochs) {
    const auto at = [epochs](double frac) { return static_cast<std::size_t>(std::floor(frac * static_cast<double>(epochs))); };
    std::vector<LrStep> out;
    const std::size_t first = at(0.8);
    const std::size_t second = at(0.9);
    if (first > 0) out.push_back({first, base_lr * 0.1});
    if (second > first) out.push_back({second, base_lr * 0.01});
    return out;
}

namespace {

template <typename T>
void update(Tensor<T>& w, Tensor<T>& g, Tensor<T>& v, T lr, T mu, T decay) {
    T* wp = w.raw();
    T* gp = g.raw();
    T* vp = v.raw();
#pragma omp simd
    for (std::size_t i = 0; i < w.size(); ++i) {
        vp[i] = mu * vp[i] - lr * (gp[i] + decay * wp[i]);
        wp[i] += vp[i];
        gp[i] = T{0};
    }
}

}  // namespace

template <typename T>
void sgd_step(std::span<LayerParams<T>* const> params, const SgdConfig& config, std::size_t epoch) {
    const T lr = static_cast<T>(config.lr_at(epoch));
    const T mu = static_cast<T>(config.momentum);
    const T decay = static_cast<T>(config.weight_decay);
    for (LayerParams<T>* p : params) {
        update(p->weights, p->weight_grads, p->weight_velocity, lr, mu, decay);
        update(p->biases, p->bias_grads, p->bias_velocity, lr, mu, decay);
    }
}

template void sgd_step<float>(std::span<LayerParams<float>* const>, const SgdConfig&, std::size_t);
template void sgd_step<double>(std::span<LayerParams<double>* const>, const SgdConfig&, std::size_t);

}  // namespace hpe::nn
