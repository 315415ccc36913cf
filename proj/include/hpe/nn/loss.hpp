#pragma once

#include "hpe/nn/tensor.hpp"

namespace hpe::nn {

template <typename T>
struct LossResult {
    T value{};
    Tensor<T> grad;  // d(value)/d(pred)
};

/// Sum over the batch of squared Euclidean distances: sum_i ||target_i - pred_i||^2.
/// The gradient with respect to `pred` is 2 (pred - target).
template <typename T>
LossResult<T> l2_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    if (pred.shape() != target.shape()) {
        throw ShapeError("l2_loss: prediction " + to_string(pred.shape()) + " vs target " +
                         to_string(target.shape()));
    }
    LossResult<T> r;
    r.grad = Tensor<T>(pred.shape());
    T sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const T d = pred[i] - target[i];
        sum += d * d;
        r.grad[i] = T{2} * d;
    }
    r.value = sum;
    return r;
}

}  // namespace hpe::nn
