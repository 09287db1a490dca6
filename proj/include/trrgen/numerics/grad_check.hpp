#pragma once

#include <functional>
#include <vector>

#include "trrgen/numerics/tape.hpp"

namespace trrgen::num {

// Builds a scalar loss on `tape` from the bound parameters (same order as the
// tensors handed to grad_check).
using LossBuilder = std::function<Var(Tape& tape, const std::vector<Var>& params)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
};

// Compares tape gradients with central differences (f(x+eps)-f(x-eps))/(2 eps)
// at every coordinate of every tensor. Relative error per coordinate is
// |a-n| / max(|a|, |n|, 1e-8). Tensors are restored before returning.
GradCheckResult grad_check(const LossBuilder& build, const std::vector<Tensor*>& params, double eps = 1e-5);

}  // namespace trrgen::num
