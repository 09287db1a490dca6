#include "trrgen/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace trrgen::num {

namespace {

double evaluate(const LossBuilder& build, const std::vector<Tensor*>& params) {
    Tape tape(false);
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (Tensor* p : params) vars.push_back(tape.bind(*p, false));
    return build(tape, vars).value().item();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build, const std::vector<Tensor*>& params, double eps) {
    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> vars;
        for (Tensor* p : params) vars.push_back(tape.bind(*p, true));
        Var loss = build(tape, vars);
        tape.backward(loss);
        for (const Var& v : vars) analytic.push_back(tape.grad(v));
    }

    GradCheckResult result;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = *params[t];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p[i];
            p[i] = saved + eps;
            const double up = evaluate(build, params);
            p[i] = saved - eps;
            const double down = evaluate(build, params);
            p[i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[t][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            const double rel = std::abs(a - numeric) / denom;
            ++result.coordinates;
            if (rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_tensor = t;
                result.worst_index = i;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace trrgen::num
