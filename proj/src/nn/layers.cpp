#include "hpe/nn/layers.hpp"

#include <cmath>
#include <sstream>

namespace hpe::nn {

namespace {

void require_shape(const Shape& got, const Shape& want, const char* where) {
    if (got != want) {
        throw ShapeError(std::string(where) + ": expected shape " + to_string(want) + ", got " + to_string(got));
    }
}

template <typename T>
void glorot_fill(Tensor<T>& w, double fan_in, double fan_out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (T& v : w.values()) v = static_cast<T>(dist(rng));
}

// c[m x n] += a[m x k] * b[k x n], all row-major. Four rows of `a` share each
// pass over a row of `b`.
template <typename T>
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        T* c0 = c + (i + 0) * n;
        T* c1 = c + (i + 1) * n;
        T* c2 = c + (i + 2) * n;
        T* c3 = c + (i + 3) * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T a0 = a[(i + 0) * k + p];
            const T a1 = a[(i + 1) * k + p];
            const T a2 = a[(i + 2) * k + p];
            const T a3 = a[(i + 3) * k + p];
            const T* bp = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) {
                const T bv = bp[j];
                c0[j] += a0 * bv;
                c1[j] += a1 * bv;
                c2[j] += a2 * bv;
                c3[j] += a3 * bv;
            }
        }
    }
    for (; i < m; ++i) {
        T* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[i * k + p];
            const T* bp = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
    T s = 0;
#pragma omp simd reduction(+ : s)
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

// --- LayerParams -----------------------------------------------------------

template <typename T>
LayerParams<T>::LayerParams(Shape weight_shape, Shape bias_shape)
    : weights(weight_shape),
      biases(bias_shape),
      weight_grads(weight_shape),
      bias_grads(bias_shape),
      weight_velocity(weight_shape),
      bias_velocity(bias_shape) {}

template <typename T>
void LayerParams<T>::zero_grads() {
    weight_grads.fill(T{0});
    bias_grads.fill(T{0});
}

// --- Conv2d ----------------------------------------------------------------

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : in_channels_(in_channels),
      filters_(filters),
      kernel_(kernel),
      params_({filters, in_channels * kernel * kernel}, {filters}) {
    if (in_channels == 0 || filters == 0 || kernel == 0) {
        throw ShapeError("conv layer dimensions must be positive");
    }
}

template <typename T>
std::string Conv2d<T>::describe() const {
    std::ostringstream ss;
    ss << "conv " << kernel_ << "x" << kernel_ << "x" << filters_;
    return ss.str();
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& input) const {
    if (input.size() != 3 || input[0] != in_channels_ || input[1] < kernel_ || input[2] < kernel_) {
        throw ShapeError(describe() + ": input " + to_string(input) + " incompatible with weights " +
                         to_string({filters_, in_channels_, kernel_, kernel_}));
    }
    return {filters_, input[1] - kernel_ + 1, input[2] - kernel_ + 1};
}

template <typename T>
Tensor<T> Conv2d<T>::compute(const Tensor<T>& input, std::vector<T>& columns) const {
    const Shape out_shape = output_shape(input.shape());
    const std::size_t h = input.dim(1), w = input.dim(2), k = kernel_;
    const std::size_t oh = out_shape[1], ow = out_shape[2];
    const std::size_t positions = oh * ow;
    const std::size_t depth = in_channels_ * k * k;

    columns.resize(depth * positions);
    const T* in = input.raw();
    for (std::size_t c = 0; c < in_channels_; ++c) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                T* dst = columns.data() + ((c * k + i) * k + j) * positions;
                for (std::size_t y = 0; y < oh; ++y) {
                    const T* src = in + (c * h + y + i) * w + j;
                    std::copy(src, src + ow, dst + y * ow);
                }
            }
        }
    }

    Tensor<T> out(out_shape);
    for (std::size_t f = 0; f < filters_; ++f) {
        std::fill_n(out.raw() + f * positions, positions, params_.biases[f]);
    }
    gemm_accumulate(filters_, positions, depth, params_.weights.raw(), columns.data(), out.raw());
    return out;
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& input) {
    Tensor<T> out = compute(input, cached_columns_);
    cached_input_shape_ = input.shape();
    return out;
}

template <typename T>
Tensor<T> Conv2d<T>::infer(const Tensor<T>& input) const {
    std::vector<T> columns;
    return compute(input, columns);
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_output) {
    if (cached_input_shape_.empty()) throw ShapeError(describe() + ": backward called before forward");
    const Shape out_shape = output_shape(cached_input_shape_);
    require_shape(grad_output.shape(), out_shape, "conv backward");
    const std::size_t h = cached_input_shape_[1], w = cached_input_shape_[2], k = kernel_;
    const std::size_t oh = out_shape[1], ow = out_shape[2];
    const std::size_t positions = oh * ow;
    const std::size_t depth = in_channels_ * k * k;
    const T* g = grad_output.raw();

    for (std::size_t f = 0; f < filters_; ++f) {
        const T* gf = g + f * positions;
        T bias_sum = 0;
#pragma omp simd reduction(+ : bias_sum)
        for (std::size_t p = 0; p < positions; ++p) bias_sum += gf[p];
        params_.bias_grads[f] += bias_sum;
        T* wg = params_.weight_grads.raw() + f * depth;
        for (std::size_t r = 0; r < depth; ++r) {
            wg[r] += dot(gf, cached_columns_.data() + r * positions, positions);
        }
    }

    if (!this->input_grad_) return {};

    // d(columns) = W^T * g, then scatter back (col2im).
    std::vector<T> wt(depth * filters_);
    for (std::size_t f = 0; f < filters_; ++f)
        for (std::size_t r = 0; r < depth; ++r) wt[r * filters_ + f] = params_.weights[f * depth + r];
    std::vector<T> dcol(depth * positions, T{0});
    gemm_accumulate(depth, positions, filters_, wt.data(), g, dcol.data());

    Tensor<T> grad_input(cached_input_shape_);
    T* dx = grad_input.raw();
    for (std::size_t c = 0; c < in_channels_; ++c) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const T* src = dcol.data() + ((c * k + i) * k + j) * positions;
                for (std::size_t y = 0; y < oh; ++y) {
                    T* dst = dx + (c * h + y + i) * w + j;
                    const T* s = src + y * ow;
#pragma omp simd
                    for (std::size_t x = 0; x < ow; ++x) dst[x] += s[x];
                }
            }
        }
    }
    return grad_input;
}

template <typename T>
void Conv2d<T>::initialize(std::mt19937_64& rng) {
    const double area = static_cast<double>(kernel_ * kernel_);
    glorot_fill(params_.weights, static_cast<double>(in_channels_) * area, static_cast<double>(filters_) * area, rng);
    params_.biases.fill(T{0});
    params_.weight_velocity.fill(T{0});
    params_.bias_velocity.fill(T{0});
    params_.zero_grads();
}

// --- MaxPool2x2 ------------------------------------------------------------

template <typename T>
Shape MaxPool2x2<T>::output_shape(const Shape& input) const {
    if (input.size() != 3 || input[1] % 2 != 0 || input[2] % 2 != 0 || input[1] == 0 || input[2] == 0) {
        throw ShapeError("maxpool 2x2 needs a [C,H,W] input with even H and W, got " + to_string(input));
    }
    return {input[0], input[1] / 2, input[2] / 2};
}

template <typename T>
Tensor<T> MaxPool2x2<T>::compute(const Tensor<T>& input, std::vector<std::size_t>* argmax) const {
    const Shape out_shape = output_shape(input.shape());
    const std::size_t h = input.dim(1), w = input.dim(2);
    const std::size_t oh = out_shape[1], ow = out_shape[2];
    Tensor<T> out(out_shape);
    if (argmax) argmax->resize(out.size());
    const T* in = input.raw();
    std::size_t o = 0;
    for (std::size_t c = 0; c < out_shape[0]; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x, ++o) {
                const std::size_t base = (c * h + 2 * y) * w + 2 * x;
                const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
                std::size_t best = cand[0];
                for (int q = 1; q < 4; ++q) {
                    if (in[cand[q]] > in[best]) best = cand[q];
                }
                out[o] = in[best];
                if (argmax) (*argmax)[o] = best;
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> MaxPool2x2<T>::forward(const Tensor<T>& input) {
    Tensor<T> out = compute(input, &argmax_);
    cached_input_shape_ = input.shape();
    return out;
}

template <typename T>
Tensor<T> MaxPool2x2<T>::infer(const Tensor<T>& input) const {
    return compute(input, nullptr);
}

template <typename T>
Tensor<T> MaxPool2x2<T>::backward(const Tensor<T>& grad_output) {
    if (cached_input_shape_.empty()) throw ShapeError("maxpool backward called before forward");
    require_shape(grad_output.shape(), output_shape(cached_input_shape_), "maxpool backward");
    if (!this->input_grad_) return {};
    Tensor<T> grad_input(cached_input_shape_);
    for (std::size_t o = 0; o < grad_output.size(); ++o) grad_input[argmax_[o]] += grad_output[o];
    return grad_input;
}

// --- Tanh ------------------------------------------------------------------

template <typename T>
Tensor<T> Tanh<T>::infer(const Tensor<T>& input) const {
    Tensor<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = std::tanh(input[i]);
    return out;
}

template <typename T>
Tensor<T> Tanh<T>::forward(const Tensor<T>& input) {
    cached_output_ = infer(input);
    return cached_output_;
}

template <typename T>
Tensor<T> Tanh<T>::backward(const Tensor<T>& grad_output) {
    if (cached_output_.empty()) throw ShapeError("tanh backward called before forward");
    require_shape(grad_output.shape(), cached_output_.shape(), "tanh backward");
    if (!this->input_grad_) return {};
    Tensor<T> grad_input(grad_output.shape());
    for (std::size_t i = 0; i < grad_output.size(); ++i) {
        const T y = cached_output_[i];
        grad_input[i] = grad_output[i] * (T{1} - y * y);
    }
    return grad_input;
}

// --- Flatten ---------------------------------------------------------------

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& input) {
    cached_input_shape_ = input.shape();
    return infer(input);
}

template <typename T>
Tensor<T> Flatten<T>::infer(const Tensor<T>& input) const {
    return input.reshaped({input.size()});
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_output) {
    if (cached_input_shape_.empty()) throw ShapeError("flatten backward called before forward");
    require_shape(grad_output.shape(), {element_count(cached_input_shape_)}, "flatten backward");
    if (!this->input_grad_) return {};
    return grad_output.reshaped(cached_input_shape_);
}

// --- Linear ----------------------------------------------------------------

template <typename T>
Linear<T>::Linear(std::size_t in_features, std::size_t out_features)
    : in_(in_features), out_(out_features), params_({out_features, in_features}, {out_features}) {
    if (in_features == 0 || out_features == 0) throw ShapeError("linear layer dimensions must be positive");
}

template <typename T>
std::string Linear<T>::describe() const {
    return "fc " + std::to_string(in_) + "->" + std::to_string(out_);
}

template <typename T>
Shape Linear<T>::output_shape(const Shape& input) const {
    if (input.size() != 1 || input[0] != in_) {
        throw ShapeError(describe() + ": input " + to_string(input) + " incompatible with weights " +
                         to_string({out_, in_}));
    }
    return {out_};
}

template <typename T>
Tensor<T> Linear<T>::infer(const Tensor<T>& input) const {
    Tensor<T> out(output_shape(input.shape()));
    const T* w = params_.weights.raw();
    for (std::size_t o = 0; o < out_; ++o) out[o] = params_.biases[o] + dot(w + o * in_, input.raw(), in_);
    return out;
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& input) {
    Tensor<T> out = infer(input);
    cached_input_ = input;
    return out;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& grad_output) {
    if (cached_input_.empty()) throw ShapeError(describe() + ": backward called before forward");
    require_shape(grad_output.shape(), {out_}, "linear backward");
    const T* x = cached_input_.raw();
    for (std::size_t o = 0; o < out_; ++o) {
        const T g = grad_output[o];
        params_.bias_grads[o] += g;
        T* wg = params_.weight_grads.raw() + o * in_;
#pragma omp simd
        for (std::size_t i = 0; i < in_; ++i) wg[i] += g * x[i];
    }
    if (!this->input_grad_) return {};
    Tensor<T> grad_input({in_});
    T* dx = grad_input.raw();
    for (std::size_t o = 0; o < out_; ++o) {
        const T g = grad_output[o];
        const T* w = params_.weights.raw() + o * in_;
#pragma omp simd
        for (std::size_t i = 0; i < in_; ++i) dx[i] += g * w[i];
    }
    return grad_input;
}

template <typename T>
void Linear<T>::initialize(std::mt19937_64& rng) {
    glorot_fill(params_.weights, static_cast<double>(in_), static_cast<double>(out_), rng);
    params_.biases.fill(T{0});
    params_.weight_velocity.fill(T{0});
    params_.bias_velocity.fill(T{0});
    params_.zero_grads();
}

// --- Sequential ------------------------------------------------------------

template <typename T>
Layer<T>& Sequential<T>::add(std::unique_ptr<Layer<T>> layer) {
    Shape next = layer->output_shape(output_shape());
    if (layers_.empty()) layer->set_input_grad_enabled(false);
    layers_.push_back(std::move(layer));
    shapes_.push_back(std::move(next));
    return *layers_.back();
}

template <typename T>
void Sequential<T>::check_input(const Tensor<T>& input) const {
    require_shape(input.shape(), input_shape_, "network input");
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& input) {
    check_input(input);
    Tensor<T> x = input;
    for (auto& l : layers_) x = l->forward(x);
    return x;
}

template <typename T>
Tensor<T> Sequential<T>::infer(const Tensor<T>& input) const {
    check_input(input);
    Tensor<T> x = input;
    for (const auto& l : layers_) x = l->infer(x);
    return x;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_output) {
    require_shape(grad_output.shape(), output_shape(), "network backward");
    Tensor<T> g = grad_output;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

template <typename T>
void Sequential<T>::initialize(std::mt19937_64& rng) {
    for (auto& l : layers_) l->initialize(rng);
}

template <typename T>
void Sequential<T>::zero_grads() {
    for (auto* p : parameters()) p->zero_grads();
}

template <typename T>
std::vector<LayerParams<T>*> Sequential<T>::parameters() {
    std::vector<LayerParams<T>*> out;
    for (auto& l : layers_)
        if (auto* p = l->params()) out.push_back(p);
    return out;
}

template <typename T>
std::vector<const LayerParams<T>*> Sequential<T>::parameters() const {
    std::vector<const LayerParams<T>*> out;
    for (const auto& l : layers_)
        if (const auto* p = l->params()) out.push_back(p);
    return out;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->count();
    return n;
}

template <typename T>
std::string Sequential<T>::describe() const {
    std::ostringstream ss;
    ss << "input " << to_string(input_shape_) << '\n';
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        ss << layers_[i]->describe() << " -> " << to_string(shapes_[i]) << '\n';
    }
    return ss.str();
}

template struct LayerParams<float>;
template struct LayerParams<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class MaxPool2x2<float>;
template class MaxPool2x2<double>;
template class Tanh<float>;
template class Tanh<double>;
template class Flatten<float>;
template class Flatten<double>;
template class Linear<float>;
template class Linear<double>;
template class Sequential<float>;
template class Sequential<double>;

}  // namespace hpe::nn
