#include "trrgen/model/transformer.hpp"

#include <cmath>

#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/error.hpp"

namespace trrgen::model {

using num::Tensor;
using num::Var;

Tensor positional_encoding(std::size_t seq_len, std::size_t d_model) {
    if (d_model == 0 || d_model % 2 != 0)
        throw ConfigError("positional encoding needs an even d_model, got " + std::to_string(d_model));
    if (seq_len == 0) throw ConfigError("positional encoding needs seq_len >= 1");
    Tensor pe = Tensor::matrix(seq_len, d_model);
    for (std::size_t i = 0; i < d_model / 2; ++i) {
        const double rate = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
        for (std::size_t pos = 0; pos < seq_len; ++pos) {
            const double angle = static_cast<double>(pos) / rate;
            pe.at(pos, 2 * i) = std::sin(angle);
            pe.at(pos, 2 * i + 1) = std::cos(angle);
        }
    }
    return pe;
}

Var embed_review(const ParameterVars& vars, std::span<const TokenId> src, TokenId rating, TokenId category,
                 FusionVariant variant) {
    if (src.empty()) throw ValidationError("embed_review: empty review");
    num::Tape& tape = *vars.embedding.tape();
    const std::size_t d_model = vars.embedding.cols();
    const Var words = num::embedding_lookup(vars.embedding, src);
    const Var positions = tape.constant(positional_encoding(src.size(), d_model));
    auto single = [&](TokenId id) { return num::embedding_lookup(vars.embedding, std::span<const TokenId>(&id, 1)); };

    switch (variant) {
        case FusionVariant::vanilla:
            return num::add(words, positions);
        case FusionVariant::rating_only:
            return num::add(num::add(words, single(rating)), positions);
        case FusionVariant::category_only:
            return num::concat_rows({single(category), num::add(words, positions)});
        case FusionVariant::trrgen_concat:
            return num::concat_rows({single(category), num::add(num::add(words, single(rating)), positions)});
        case FusionVariant::trrgen_sum:
            return num::add(num::add(num::add(words, single(rating)), single(category)), positions);
        case FusionVariant::trrgen_order:
            return num::concat_rows({single(category), single(rating), num::add(words, positions)});
    }
    throw ConfigError("embed_review: invalid fusion variant");
}

AttentionResult multi_head_attention(Var queries, Var keys_values, const num::AttentionMask& mask,
                                     const AttentionWeights<Var>& weights) {
    if (mask.rows() != queries.rows() || mask.cols() != keys_values.rows())
        throw ShapeError("attention mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                         " but attention is " + std::to_string(queries.rows()) + "x" +
                         std::to_string(keys_values.rows()));
    const std::size_t heads = weights.query.size();
    if (heads == 0 || weights.key.size() != heads || weights.value.size() != heads)
        throw ShapeError("attention needs the same positive number of query/key/value projections");
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(weights.query.front().cols()));

    AttentionResult result;
    std::vector<Var> head_outputs;
    head_outputs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const Var q = num::matmul(queries, weights.query[h]);
        const Var k = num::matmul(keys_values, weights.key[h]);
        const Var v = num::matmul(keys_values, weights.value[h]);
        const Var scores = num::scale(num::matmul_nt(q, k), inv_sqrt_dk);
        const Var attn = num::masked_softmax(scores, mask);
        result.weights.push_back(attn);
        head_outputs.push_back(num::matmul(attn, v));
    }
    const Var joined = heads == 1 ? head_outputs.front() : num::concat_cols(head_outputs);
    result.output = num::matmul(joined, weights.output);
    return result;
}

Var feed_forward(Var x, const FeedForwardWeights<Var>& w) {
    const Var hidden = num::relu(num::add(num::matmul(x, w.w1), w.b1));
    return num::add(num::matmul(hidden, w.w2), w.b2);
}

Var sublayer_connect(Var x, Var fx, const NormWeights<Var>& norm, double eps) {
    return num::layer_norm(num::add(x, fx), norm.gamma, norm.beta, eps);
}

namespace {

Var drop(Var x, const ModelConfig& config, const ForwardContext& ctx) {
    return num::dropout(x, config.dropout, ctx.training, ctx.rng);
}

}  // namespace

EncoderOutput encode(Var input, std::span<const std::uint8_t> key_valid, const ParameterVars& vars,
                     const ModelConfig& config, const ForwardContext& ctx) {
    if (key_valid.size() != input.rows())
        throw ShapeError("encode: key mask length " + std::to_string(key_valid.size()) + " for " +
                         std::to_string(input.rows()) + " positions");
    if (input.rows() > config.max_src_len)
        throw ValidationError("encoder input of " + std::to_string(input.rows()) + " positions exceeds max_src_len " +
                              std::to_string(config.max_src_len));
    const auto mask = num::AttentionMask::key_padding(input.rows(), key_valid);
    Var x = input;
    for (const auto& layer : vars.encoder) {
        const auto attention = multi_head_attention(x, x, mask, layer.self_attention);
        x = sublayer_connect(x, drop(attention.output, config, ctx), layer.attention_norm, config.layer_norm_eps);
        x = sublayer_connect(x, drop(feed_forward(x, layer.feed_forward), config, ctx), layer.ffn_norm,
                             config.layer_norm_eps);
    }
    return {x, std::vector<std::uint8_t>(key_valid.begin(), key_valid.end())};
}

EncoderOutput encode_review(const ParameterVars& vars, std::span<const TokenId> src, TokenId rating, TokenId category,
                            const ModelConfig& config, const ForwardContext& ctx) {
    const Var input = drop(embed_review(vars, src, rating, category, config.fusion_variant), config, ctx);
    const std::vector<std::uint8_t> valid(input.rows(), 1);
    return encode(input, valid, vars, config, ctx);
}

Var decoder_forward(std::span<const TokenId> tgt_input, const EncoderOutput& memory, const ParameterVars& vars,
                    const ModelConfig& config, const ForwardContext& ctx) {
    if (tgt_input.empty()) throw ValidationError("decoder_forward: empty target prefix");
    if (tgt_input.size() > config.max_tgt_len)
        throw ValidationError("target prefix of " + std::to_string(tgt_input.size()) + " tokens exceeds max_tgt_len " +
                              std::to_string(config.max_tgt_len));
    num::Tape& tape = *vars.embedding.tape();
    const std::size_t steps = tgt_input.size();
    Var y = num::add(num::embedding_lookup(vars.embedding, tgt_input),
                     tape.constant(positional_encoding(steps, vars.embedding.cols())));
    y = drop(y, config, ctx);

    const auto self_mask = num::AttentionMask::causal(steps);
    const auto cross_mask = num::AttentionMask::key_padding(steps, memory.key_valid);
    for (const auto& layer : vars.decoder) {
        const auto self = multi_head_attention(y, y, self_mask, layer.self_attention);
        y = sublayer_connect(y, drop(self.output, config, ctx), layer.self_norm, config.layer_norm_eps);
        const auto cross = multi_head_attention(y, memory.states, cross_mask, layer.cross_attention);
        y = sublayer_connect(y, drop(cross.output, config, ctx), layer.cross_norm, config.layer_norm_eps);
        y = sublayer_connect(y, drop(feed_forward(y, layer.feed_forward), config, ctx), layer.ffn_norm,
                             config.layer_norm_eps);
    }
    const Var projected =
        vars.output_weight.valid() ? num::matmul(y, vars.output_weight) : num::matmul_nt(y, vars.embedding);
    return num::add(projected, vars.output_bias);
}

Batch make_batch(std::span<const corpus::EncodedRecord> records) {
    if (records.empty()) throw ValidationError("empty batch");
    Batch b;
    b.size = records.size();
    for (const auto& r : records) {
        if (r.src.empty()) throw ValidationError("batch record with empty source");
        if (r.tgt.size() < 2) throw ValidationError("batch record target needs at least ⟨sos⟩ and one token");
        b.src_len = std::max(b.src_len, r.src.size());
        b.tgt_len = std::max(b.tgt_len, r.tgt.size() - 1);
    }
    b.src.assign(b.size * b.src_len, corpus::Vocabulary::kPad);
    b.tgt_input.assign(b.size * b.tgt_len, corpus::Vocabulary::kPad);
    b.tgt_label.assign(b.size * b.tgt_len, corpus::Vocabulary::kPad);
    for (std::size_t i = 0; i < b.size; ++i) {
        const auto& r = records[i];
        std::copy(r.src.begin(), r.src.end(), b.src.begin() + static_cast<std::ptrdiff_t>(i * b.src_len));
        b.src_lengths.push_back(r.src.size());
        for (std::size_t t = 0; t + 1 < r.tgt.size(); ++t) {
            b.tgt_input[i * b.tgt_len + t] = r.tgt[t];
            b.tgt_label[i * b.tgt_len + t] = r.tgt[t + 1];
        }
        b.rating.push_back(r.rating);
        b.category.push_back(r.category);
    }
    return b;
}

ForwardResult forward_training(const Batch& batch, const ParameterVars& vars, const ModelConfig& config,
                               const ForwardContext& ctx) {
    if (batch.size == 0) throw ValidationError("empty batch");
    ForwardResult result;
    for (std::size_t i = 0; i < batch.size; ++i) {
        const std::span<const TokenId> src(batch.src.data() + i * batch.src_len, batch.src_len);
        const Var input =
            drop(embed_review(vars, src, batch.rating[i], batch.category[i], config.fusion_variant), config, ctx);
        const std::size_t slots = input.rows() - batch.src_len;
        std::vector<std::uint8_t> valid(input.rows(), 0);
        for (std::size_t p = 0; p < slots + batch.src_lengths[i]; ++p) valid[p] = 1;
        const EncoderOutput memory = encode(input, valid, vars, config, ctx);
        const std::span<const TokenId> tgt(batch.tgt_input.data() + i * batch.tgt_len, batch.tgt_len);
        result.logits.push_back(decoder_forward(tgt, memory, vars, config, ctx));
    }
    const Var all_logits = result.logits.size() == 1 ? result.logits.front() : num::concat_rows(result.logits);
    result.loss = num::cross_entropy_logits(all_logits, batch.tgt_label, corpus::Vocabulary::kPad);
    return result;
}

}  // namespace trrgen::model
