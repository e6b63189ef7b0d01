#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <type_traits>

#include "edos/autograd.hpp"

namespace edos {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_coord = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference verification of reverse-mode gradients, one coordinate
// at a time. Must run on double; f must be deterministic (dropout off).
template <typename T>
GradCheckReport grad_check_report(const std::function<Var<T>()>& f, ParamStore<T>& params,
                                  T h = T(1e-5)) {
    static_assert(std::is_same_v<T, double>, "grad_check requires 64-bit mode");

    const T base0 = [&] {
        Var<T> loss = f();
        if (loss.numel() != 1) throw std::invalid_argument("grad_check: f must return a scalar");
        return loss.value()[0];
    }();
    const T base1 = f().value()[0];
    if (base0 != base1) throw std::runtime_error("grad_check: f is not deterministic");

    params.zero_grad();
    backward(f());
    std::vector<Tensor<T>> analytic;
    analytic.reserve(params.size());
    for (auto& [name, var] : params)
        analytic.push_back(var.has_grad() ? var.grad() : Tensor<T>(var.shape()));

    GradCheckReport report;
    std::size_t pi = 0;
    for (auto& [name, var] : params) {
        Tensor<T>& theta = var.value();
        for (std::size_t i = 0; i < theta.numel(); ++i) {
            const T saved = theta[i];
            theta[i] = saved + h;
            const T up = f().value()[0];
            theta[i] = saved - h;
            const T down = f().value()[0];
            theta[i] = saved;
            const double numeric = static_cast<double>(up - down) / (2.0 * static_cast<double>(h));
            const double a = static_cast<double>(analytic[pi][i]);
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = name;
                report.worst_coord = i;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
        ++pi;
    }
    params.zero_grad();
    return report;
}

template <typename T>
double grad_check(const std::function<Var<T>()>& f, ParamStore<T>& params, T h = T(1e-5)) {
    return grad_check_report(f, params, h).max_rel_err;
}

} // namespace edos
