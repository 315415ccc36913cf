#pragma once

// Central finite-difference oracle for the NN layers. Test-only; shares no
// code with the backward passes it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>

#include "hpe/nn/tensor.hpp"

namespace hpe::testing {

inline double relative_error(double analytic, double numeric) {
    const double scale = std::max({1e-6, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / scale;
}

/// d f / d values[i] by central differences; restores values[i].
inline double central_difference(const std::function<double()>& f, double& value, double eps = 1e-5) {
    const double saved = value;
    value = saved + eps;
    const double plus = f();
    value = saved - eps;
    const double minus = f();
    value = saved;
    return (plus - minus) / (2.0 * eps);
}

/// True when the central difference at `eps` disagrees with the one at
/// eps/10 by more than `tol`: a smooth loss agrees to O(eps^2), so a gap means
/// the probe straddles a max-pool switch.
inline bool straddles_kink(const std::function<double()>& f, double& value, double eps = 1e-5, double tol = 1e-4) {
    return relative_error(central_difference(f, value, eps), central_difference(f, value, eps / 10)) > tol;
}

inline nn::Tensor<double> random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    nn::Tensor<double> t(std::move(shape));
    std::uniform_real_distribution<double> d(lo, hi);
    for (double& v : t.values()) v = d(rng);
    return t;
}

/// Scalar probe sum_i w_i * y_i: its gradient with respect to y is w.
inline double probe(const nn::Tensor<double>& y, const nn::Tensor<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
    return s;
}

struct CheckStats {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

}  // namespace hpe::testing
