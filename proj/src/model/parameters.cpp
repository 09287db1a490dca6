#include "trrgen/model/parameters.hpp"

#include <cmath>
#include <random>

#include "trrgen/error.hpp"

namespace trrgen::model {

namespace {

using num::Tensor;

// Maps every slot of `w` through fn(const T&) -> U, visiting in the same order
// as for_each_weight.
template <class U, class T, class F>
ModelWeights<U> transform_weights(const ModelWeights<T>& w, F&& fn) {
    auto attention = [&fn](const AttentionWeights<T>& a) {
        AttentionWeights<U> out;
        for (const auto& q : a.query) out.query.push_back(fn(q));
        for (const auto& k : a.key) out.key.push_back(fn(k));
        for (const auto& v : a.value) out.value.push_back(fn(v));
        out.output = fn(a.output);
        return out;
    };
    auto norm = [&fn](const NormWeights<T>& n) {
        NormWeights<U> out;
        out.gamma = fn(n.gamma);
        out.beta = fn(n.beta);
        return out;
    };
    auto ffn = [&fn](const FeedForwardWeights<T>& f) {
        FeedForwardWeights<U> out;
        out.w1 = fn(f.w1);
        out.b1 = fn(f.b1);
        out.w2 = fn(f.w2);
        out.b2 = fn(f.b2);
        return out;
    };
    ModelWeights<U> out;
    out.embedding = fn(w.embedding);
    for (const auto& layer : w.encoder) {
        EncoderLayerWeights<U> l;
        l.self_attention = attention(layer.self_attention);
        l.attention_norm = norm(layer.attention_norm);
        l.feed_forward = ffn(layer.feed_forward);
        l.ffn_norm = norm(layer.ffn_norm);
        out.encoder.push_back(std::move(l));
    }
    for (const auto& layer : w.decoder) {
        DecoderLayerWeights<U> l;
        l.self_attention = attention(layer.self_attention);
        l.self_norm = norm(layer.self_norm);
        l.cross_attention = attention(layer.cross_attention);
        l.cross_norm = norm(layer.cross_norm);
        l.feed_forward = ffn(layer.feed_forward);
        l.ffn_norm = norm(layer.ffn_norm);
        out.decoder.push_back(std::move(l));
    }
    if (detail::present(w.output_weight)) out.output_weight = fn(w.output_weight);
    out.output_bias = fn(w.output_bias);
    return out;
}

AttentionWeights<Tensor> zero_attention(const ModelConfig& c) {
    AttentionWeights<Tensor> a;
    for (std::size_t h = 0; h < c.n_heads; ++h) {
        a.query.push_back(Tensor::matrix(c.d_model, c.d_k()));
        a.key.push_back(Tensor::matrix(c.d_model, c.d_k()));
        a.value.push_back(Tensor::matrix(c.d_model, c.d_k()));
    }
    a.output = Tensor::matrix(c.d_model, c.d_model);
    return a;
}

NormWeights<Tensor> unit_norm(const ModelConfig& c) {
    return {Tensor::matrix(1, c.d_model, 1.0), Tensor::matrix(1, c.d_model, 0.0)};
}

FeedForwardWeights<Tensor> zero_ffn(const ModelConfig& c) {
    return {Tensor::matrix(c.d_model, c.d_ff), Tensor::matrix(1, c.d_ff), Tensor::matrix(c.d_ff, c.d_model),
            Tensor::matrix(1, c.d_model)};
}

}  // namespace

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Parameters zero_parameters(const ModelConfig& config) {
    config.validate();
    Parameters p;
    p.embedding = Tensor::matrix(config.vocab_size, config.d_model);
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        p.encoder.push_back({zero_attention(config), unit_norm(config), zero_ffn(config), unit_norm(config)});
        p.decoder.push_back({zero_attention(config), unit_norm(config), zero_attention(config), unit_norm(config),
                             zero_ffn(config), unit_norm(config)});
    }
    if (!config.tie_output_projection) p.output_weight = Tensor::matrix(config.d_model, config.vocab_size);
    p.output_bias = Tensor::matrix(1, config.vocab_size);
    return p;
}

Parameters init_parameters(const ModelConfig& config, std::uint64_t seed) {
    Parameters p = zero_parameters(config);
    std::mt19937_64 rng(seed);
    for_each_weight(p, [&rng](const std::string& name, Tensor& t) {
        const bool is_vector = name.ends_with(".gamma") || name.ends_with(".beta") || name.ends_with(".b1") ||
                               name.ends_with(".b2") || name == "output_bias";
        if (is_vector) return;
        const double bound = glorot_bound(t.rows(), t.cols());
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : t.values()) v = dist(rng);
    });
    return p;
}

std::vector<Tensor*> parameter_list(Parameters& params) {
    std::vector<Tensor*> out;
    for_each_weight(params, [&out](const std::string&, Tensor& t) { out.push_back(&t); });
    return out;
}

std::vector<std::string> parameter_names(const Parameters& params) {
    std::vector<std::string> out;
    for_each_weight(params, [&out](const std::string& name, const Tensor&) { out.push_back(name); });
    return out;
}

std::size_t parameter_count(const Parameters& params) {
    std::size_t n = 0;
    for_each_weight(params, [&n](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
}

ParameterVars bind_parameters(num::Tape& tape, const Parameters& params, bool requires_grad) {
    return transform_weights<num::Var>(params,
                                       [&](const Tensor& t) { return tape.bind(t, requires_grad); });
}

ParameterVars vars_from_list(const Parameters& shape_of, const std::vector<num::Var>& flat) {
    std::size_t next = 0;
    ParameterVars out = transform_weights<num::Var>(shape_of, [&](const Tensor&) {
        if (next >= flat.size()) throw ShapeError("vars_from_list: too few variables");
        return flat[next++];
    });
    if (next != flat.size()) throw ShapeError("vars_from_list: too many variables");
    return out;
}

std::vector<Tensor> collect_gradients(const num::Tape& tape, const ParameterVars& vars) {
    std::vector<Tensor> grads;
    for_each_weight(vars, [&](const std::string&, const num::Var& v) { grads.push_back(tape.grad(v)); });
    return grads;
}

}  // namespace trrgen::model
