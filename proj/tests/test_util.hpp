#pragma once

#include <filesystem>
#include <string>

#include "edos/autograd.hpp"
#include "edos/ops.hpp"
#include "edos/rng.hpp"
#include "edos/tensor.hpp"

namespace edos::testutil {

template <typename T>
Tensor<T> rand_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    Tensor<T> t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i)
        t[i] = static_cast<T>(lo + (hi - lo) * rng.uniform());
    return t;
}

// Random tensor bounded away from zero, for kinked ops like relu.
template <typename T>
Tensor<T> rand_tensor_nonzero(Rng& rng, Shape shape, double margin = 1e-2) {
    Tensor<T> t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        t[i] = static_cast<T>(sign * (margin + rng.uniform()));
    }
    return t;
}

// Reduce to a scalar sum; composing means over leading axes then rescaling
// keeps this independent of any single reduction op.
template <typename T>
Var<T> sum_all(Var<T> v) {
    const T n = static_cast<T>(v.numel());
    while (v.numel() > 1) v = mean_axis(v, 0);
    return scale(v, n);
}

// Fixed-weight scalarizer so gradients are informative in every coordinate.
template <typename T>
Var<T> weighted_sum(const Var<T>& v, Rng rng) {
    Tensor<T> w(v.shape());
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = static_cast<T>(rng.uniform() * 2.0 - 1.0);
    return sum_all(mul(v, constant(std::move(w))));
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("edos_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

} // namespace edos::testutil
