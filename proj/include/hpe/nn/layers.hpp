#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hpe/nn/tensor.hpp"

namespace hpe::nn {

/// Trainable parameters of one layer with their gradient accumulators and
/// momentum buffers. All six tensors of a pair share a shape.
template <typename T>
struct LayerParams {
    Tensor<T> weights;
    Tensor<T> biases;
    Tensor<T> weight_grads;
    Tensor<T> bias_grads;
    Tensor<T> weight_velocity;
    Tensor<T> bias_velocity;

    LayerParams() = default;
    LayerParams(Shape weight_shape, Shape bias_shape);

    std::size_t count() const noexcept { return weights.size() + biases.size(); }
    void zero_grads();
};

/// Single-sample layer. forward() caches whatever backward() needs;
/// infer() is the cache-free equivalent and returns identical values.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string describe() const = 0;
    /// Throws ShapeError if `input` is not accepted.
    virtual Shape output_shape(const Shape& input) const = 0;

    virtual Tensor<T> forward(const Tensor<T>& input) = 0;
    virtual Tensor<T> infer(const Tensor<T>& input) const = 0;
    /// Accumulates parameter gradients and returns d(loss)/d(input). Returns an
    /// empty tensor when input gradients are disabled.
    virtual Tensor<T> backward(const Tensor<T>& grad_output) = 0;

    virtual LayerParams<T>* params() { return nullptr; }
    virtual const LayerParams<T>* params() const { return nullptr; }
    /// Glorot-uniform weights, zero biases. No-op for parameter-free layers.
    virtual void initialize(std::mt19937_64& /*rng*/) {}

    void set_input_grad_enabled(bool enabled) { input_grad_ = enabled; }
    bool input_grad_enabled() const { return input_grad_; }

protected:
    bool input_grad_ = true;
};

/// Valid, stride-1 cross-correlation via im2col. Input [C,H,W] -> [F,H-k+1,W-k+1].
template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(std::size_t in_channels, std::size_t filters, std::size_t kernel);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& input) override;
    Tensor<T> infer(const Tensor<T>& input) const override;
    Tensor<T> backward(const Tensor<T>& grad_output) override;
    LayerParams<T>* params() override { return &params_; }
    const LayerParams<T>* params() const override { return &params_; }
    void initialize(std::mt19937_64& rng) override;

    std::size_t in_channels() const { return in_channels_; }
    std::size_t filters() const { return filters_; }
    std::size_t kernel() const { return kernel_; }

private:
    Tensor<T> compute(const Tensor<T>& input, std::vector<T>& columns) const;

    std::size_t in_channels_;
    std::size_t filters_;
    std::size_t kernel_;
    LayerParams<T> params_;
    Shape cached_input_shape_;
    std::vector<T> cached_columns_;
};

/// 2x2 max pooling, stride 2. Ties go to the first maximum in row-major order.
template <typename T>
class MaxPool2x2 final : public Layer<T> {
public:
    std::string describe() const override { return "maxpool 2x2"; }
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& input) override;
    Tensor<T> infer(const Tensor<T>& input) const override;
    Tensor<T> backward(const Tensor<T>& grad_output) override;

private:
    Tensor<T> compute(const Tensor<T>& input, std::vector<std::size_t>* argmax) const;

    Shape cached_input_shape_;
    std::vector<std::size_t> argmax_;
};

template <typename T>
class Tanh final : public Layer<T> {
public:
    std::string describe() const override { return "tanh"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor<T> forward(const Tensor<T>& input) override;
    Tensor<T> infer(const Tensor<T>& input) const override;
    Tensor<T> backward(const Tensor<T>& grad_output) override;

private:
    Tensor<T> cached_output_;
};

/// Collapses any input to a vector.
template <typename T>
class Flatten final : public Layer<T> {
public:
    std::string describe() const override { return "flatten"; }
    Shape output_shape(const Shape& input) const override { return {element_count(input)}; }
    Tensor<T> forward(const Tensor<T>& input) override;
    Tensor<T> infer(const Tensor<T>& input) const override;
    Tensor<T> backward(const Tensor<T>& grad_output) override;

private:
    Shape cached_input_shape_;
};

/// Fully connected: y = W x + b with W of shape [out, in].
template <typename T>
class Linear final : public Layer<T> {
public:
    Linear(std::size_t in_features, std::size_t out_features);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor<T> forward(const Tensor<T>& input) override;
    Tensor<T> infer(const Tensor<T>& input) const override;
    Tensor<T> backward(const Tensor<T>& grad_output) override;
    LayerParams<T>* params() override { return &params_; }
    const LayerParams<T>* params() const override { return &params_; }
    void initialize(std::mt19937_64& rng) override;

    std::size_t in_features() const { return in_; }
    std::size_t out_features() const { return out_; }

private:
    std::size_t in_;
    std::size_t out_;
    LayerParams<T> params_;
    Tensor<T> cached_input_;
};

/// Ordered chain of layers with a fixed input shape.
template <typename T>
class Sequential {
public:
    explicit Sequential(Shape input_shape) : input_shape_(std::move(input_shape)) {}

    Sequential(Sequential&&) noexcept = default;
    Sequential& operator=(Sequential&&) noexcept = default;

    /// Appends a layer after checking it accepts the current output shape.
    Layer<T>& add(std::unique_ptr<Layer<T>> layer);

    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        return static_cast<L&>(add(std::make_unique<L>(std::forward<Args>(args)...)));
    }

    const Shape& input_shape() const { return input_shape_; }
    const Shape& output_shape() const { return shapes_.empty() ? input_shape_ : shapes_.back(); }
    /// Output shape of every layer, in order.
    const std::vector<Shape>& activation_shapes() const { return shapes_; }

    Tensor<T> forward(const Tensor<T>& input);
    Tensor<T> infer(const Tensor<T>& input) const;
    /// Back-propagates through the whole chain; returns the input gradient
    /// (empty when the first layer has input gradients disabled).
    Tensor<T> backward(const Tensor<T>& grad_output);

    void initialize(std::mt19937_64& rng);
    void zero_grads();

    std::vector<LayerParams<T>*> parameters();
    std::vector<const LayerParams<T>*> parameters() const;
    std::size_t parameter_count() const;

    std::size_t size() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
    const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }

    /// One line per layer: description and output shape.
    std::string describe() const;

private:
    void check_input(const Tensor<T>& input) const;

    Shape input_shape_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<Shape> shapes_;
};

extern template struct LayerParams<float>;
extern template struct LayerParams<double>;
extern template class Conv2d<float>;
extern template class Conv2d<double>;
extern template class MaxPool2x2<float>;
extern template class MaxPool2x2<double>;
extern template class Tanh<float>;
extern template class Tanh<double>;
extern template class Flatten<float>;
extern template class Flatten<double>;
extern template class Linear<float>;
extern template class Linear<double>;
extern template class Sequential<float>;
extern template class Sequential<double>;

}  // namespace hpe::nn
