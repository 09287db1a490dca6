#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trrgen/numerics/tensor.hpp"

namespace trrgen::num {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First/second moment estimates for a fixed list of parameters.
class AdamState {
public:
    AdamState() = default;
    AdamState(AdamConfig config, std::span<const Tensor* const> params);

    const AdamConfig& config() const noexcept { return config_; }
    std::uint64_t step() const noexcept { return step_; }
    std::size_t parameter_count() const noexcept { return first_.size(); }
    const Tensor& first_moment(std::size_t i) const { return first_.at(i); }
    const Tensor& second_moment(std::size_t i) const { return second_.at(i); }

private:
    friend void adam_step(std::span<Tensor* const>, std::span<const Tensor>, AdamState&);

    AdamConfig config_;
    std::uint64_t step_ = 0;
    std::vector<Tensor> first_;
    std::vector<Tensor> second_;
};

// One bias-corrected Adam update. grads[i] must be shaped like *params[i].
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace trrgen::num
