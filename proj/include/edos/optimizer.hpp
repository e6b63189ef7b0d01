#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "edos/autograd.hpp"

namespace edos {

struct AdamWConfig {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// One AdamW update for a single tensor. Weight decay is decoupled: applied
// to the incoming parameter value before the adaptive update.
template <typename T>
void adamw_update(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& m, Tensor<T>& v,
                  std::int64_t t, const AdamWConfig& cfg) {
    if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
        throw std::invalid_argument("adamw_update: shape mismatch");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.numel(); ++i) {
        const double g = static_cast<double>(grad[i]);
        double p = static_cast<double>(param[i]);
        p -= cfg.learning_rate * cfg.weight_decay * p;
        const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * g;
        const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        param[i] = static_cast<T>(p - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps));
    }
}

// Optimizer state for a ParamStore, aligned with its insertion order.
// Missing grads are treated as zero.
template <typename T>
class AdamW {
public:
    AdamW(const ParamStore<T>& store, AdamWConfig config) : config_(config) {
        for (const auto& [name, var] : store) {
            m_.emplace_back(var.shape());
            v_.emplace_back(var.shape());
        }
    }

    const AdamWConfig& config() const { return config_; }
    void set_learning_rate(double lr) { config_.learning_rate = lr; }
    std::int64_t steps() const { return t_; }

    void step(ParamStore<T>& store) {
        if (m_.size() != store.size()) throw std::invalid_argument("AdamW::step: store size changed");
        ++t_;
        std::size_t i = 0;
        for (auto& [name, var] : store) {
            if (var.has_grad()) {
                adamw_update(var.value(), var.grad(), m_[i], v_[i], t_, config_);
            } else {
                const Tensor<T> zeros(var.shape());
                adamw_update(var.value(), zeros, m_[i], v_[i], t_, config_);
            }
            ++i;
        }
    }

private:
    AdamWConfig config_;
    std::vector<Tensor<T>> m_;
    std::vector<Tensor<T>> v_;
    std::int64_t t_ = 0;
};

} // namespace edos
