#include "trrgen/numerics/adam.hpp"

#include <cmath>

#include "trrgen/error.hpp"

namespace trrgen::num {

AdamState::AdamState(AdamConfig config, std::span<const Tensor* const> params) : config_(config) {
    if (!(config.learning_rate > 0.0) || !(config.epsilon > 0.0) || config.beta1 < 0.0 || config.beta1 >= 1.0 ||
        config.beta2 < 0.0 || config.beta2 >= 1.0)
        throw ConfigError("adam: need learning_rate > 0, epsilon > 0 and betas in [0, 1)");
    first_.reserve(params.size());
    second_.reserve(params.size());
    for (const Tensor* p : params) {
        first_.emplace_back(p->shape(), 0.0);
        second_.emplace_back(p->shape(), 0.0);
    }
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state) {
    if (params.size() != state.first_.size() || grads.size() != params.size())
        throw ShapeError("adam_step: parameter/gradient/state counts differ");
    const AdamConfig& cfg = state.config_;
    ++state.step_;
    const double t = static_cast<double>(state.step_);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        if (g.shape() != p.shape()) throw ShapeError("adam_step: gradient shape differs from parameter");
        Tensor& m = state.first_[i];
        Tensor& v = state.second_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            p[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

}  // namespace trrgen::num
