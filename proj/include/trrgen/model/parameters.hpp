#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trrgen/model/config.hpp"
#include "trrgen/numerics/tape.hpp"
#include "trrgen/numerics/tensor.hpp"

namespace trrgen::model {

// Weight containers are templated on the slot type so the same layout holds
// raw tensors (Parameters) and their bindings on a tape (ParameterVars).

template <class T>
struct AttentionWeights {
    std::vector<T> query;  // per head, d_model x d_k
    std::vector<T> key;
    std::vector<T> value;
    T output;  // d_model x d_model, applied to the concatenated heads
};

template <class T>
struct FeedForwardWeights {
    T w1;  // d_model x d_ff
    T b1;  // 1 x d_ff
    T w2;  // d_ff x d_model
    T b2;  // 1 x d_model
};

template <class T>
struct NormWeights {
    T gamma;
    T beta;
};

template <class T>
struct EncoderLayerWeights {
    AttentionWeights<T> self_attention;
    NormWeights<T> attention_norm;
    FeedForwardWeights<T> feed_forward;
    NormWeights<T> ffn_norm;
};

template <class T>
struct DecoderLayerWeights {
    AttentionWeights<T> self_attention;
    NormWeights<T> self_norm;
    AttentionWeights<T> cross_attention;
    NormWeights<T> cross_norm;
    FeedForwardWeights<T> feed_forward;
    NormWeights<T> ffn_norm;
};

template <class T>
struct ModelWeights {
    // Shared by encoder and decoder inputs; rating and category vectors are
    // the rows of their escape tokens.
    T embedding;  // vocab x d_model
    std::vector<EncoderLayerWeights<T>> encoder;
    std::vector<DecoderLayerWeights<T>> decoder;
    T output_weight;  // d_model x vocab; unused (empty) when tied to the embedding
    T output_bias;    // 1 x vocab
};

using Parameters = ModelWeights<num::Tensor>;
using ParameterVars = ModelWeights<num::Var>;

namespace detail {
inline bool present(const num::Tensor& t) { return !t.empty(); }
inline bool present(const num::Var& v) { return v.valid(); }

template <class A, class F>
void visit_attention(const std::string& prefix, A& a, F& fn) {
    for (std::size_t h = 0; h < a.query.size(); ++h) fn(prefix + ".query." + std::to_string(h), a.query[h]);
    for (std::size_t h = 0; h < a.key.size(); ++h) fn(prefix + ".key." + std::to_string(h), a.key[h]);
    for (std::size_t h = 0; h < a.value.size(); ++h) fn(prefix + ".value." + std::to_string(h), a.value[h]);
    fn(prefix + ".output", a.output);
}
template <class N, class F>
void visit_norm(const std::string& prefix, N& n, F& fn) {
    fn(prefix + ".gamma", n.gamma);
    fn(prefix + ".beta", n.beta);
}
template <class FF, class F>
void visit_ffn(const std::string& prefix, FF& f, F& fn) {
    fn(prefix + ".w1", f.w1);
    fn(prefix + ".b1", f.b1);
    fn(prefix + ".w2", f.w2);
    fn(prefix + ".b2", f.b2);
}
}  // namespace detail

// Calls fn(name, slot) for every present weight in a fixed order. W is a
// (possibly const) ModelWeights.
template <class W, class F>
void for_each_weight(W& w, F&& fn) {
    fn(std::string("embedding"), w.embedding);
    for (std::size_t l = 0; l < w.encoder.size(); ++l) {
        const std::string p = "encoder." + std::to_string(l);
        detail::visit_attention(p + ".self_attention", w.encoder[l].self_attention, fn);
        detail::visit_norm(p + ".attention_norm", w.encoder[l].attention_norm, fn);
        detail::visit_ffn(p + ".feed_forward", w.encoder[l].feed_forward, fn);
        detail::visit_norm(p + ".ffn_norm", w.encoder[l].ffn_norm, fn);
    }
    for (std::size_t l = 0; l < w.decoder.size(); ++l) {
        const std::string p = "decoder." + std::to_string(l);
        detail::visit_attention(p + ".self_attention", w.decoder[l].self_attention, fn);
        detail::visit_norm(p + ".self_norm", w.decoder[l].self_norm, fn);
        detail::visit_attention(p + ".cross_attention", w.decoder[l].cross_attention, fn);
        detail::visit_norm(p + ".cross_norm", w.decoder[l].cross_norm, fn);
        detail::visit_ffn(p + ".feed_forward", w.decoder[l].feed_forward, fn);
        detail::visit_norm(p + ".ffn_norm", w.decoder[l].ffn_norm, fn);
    }
    if (detail::present(w.output_weight)) fn(std::string("output_weight"), w.output_weight);
    fn(std::string("output_bias"), w.output_bias);
}

// Zero-valued tensors with the shapes `config` implies.
Parameters zero_parameters(const ModelConfig& config);

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), unit gammas,
// zero betas and biases. Fully determined by `seed`.
Parameters init_parameters(const ModelConfig& config, std::uint64_t seed);

// Glorot bound used for a fan_in x fan_out matrix.
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

std::vector<num::Tensor*> parameter_list(Parameters& params);
std::vector<std::string> parameter_names(const Parameters& params);
std::size_t parameter_count(const Parameters& params);

// Binds every tensor of `params` onto `tape` by reference.
ParameterVars bind_parameters(num::Tape& tape, const Parameters& params, bool requires_grad);

// Rebuilds ParameterVars from a flat list in for_each_weight order, using
// `shape_of` for the structure (used by gradient checks).
ParameterVars vars_from_list(const Parameters& shape_of, const std::vector<num::Var>& flat);

// Gradients of every bound tensor after tape.backward(), in list order.
std::vector<num::Tensor> collect_gradients(const num::Tape& tape, const ParameterVars& vars);

}  // namespace trrgen::model

namespace trrgen::model {

// A configuration together with its weights; what decoding and checkpoints
// operate on.
struct Model {
    ModelConfig config;
    Parameters params;
};

}  // namespace trrgen::model
