#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "trrgen/corpus/encode.hpp"
#include "trrgen/model/config.hpp"
#include "trrgen/model/parameters.hpp"
#include "trrgen/numerics/ops.hpp"

namespace trrgen::model {

using corpus::TokenId;

struct ForwardContext {
    bool training = false;
    std::mt19937_64* rng = nullptr;  // required when training with dropout > 0
};

// PE(pos, 2i) = sin(pos / 10000^(2i/d)), PE(pos, 2i+1) = cos(pos / 10000^(2i/d)).
// Throws ConfigError for odd d_model.
num::Tensor positional_encoding(std::size_t seq_len, std::size_t d_model);

// Encoder input for one review under `variant`. Positional rows are indexed
// by the token's position among the review tokens; prepended category and
// rating slots carry no positional term.
num::Var embed_review(const ParameterVars& vars, std::span<const TokenId> src, TokenId rating, TokenId category,
                      FusionVariant variant);

struct AttentionResult {
    num::Var output;                 // |queries| x d_model
    std::vector<num::Var> weights;   // per head, |queries| x |keys|
};

// head_i = softmax(Q W_i^Q (K W_i^K)^T / sqrt(d_k), masked) V W_i^V, then
// Concat(heads) W^O.
AttentionResult multi_head_attention(num::Var queries, num::Var keys_values, const num::AttentionMask& mask,
                                     const AttentionWeights<num::Var>& weights);

// max(0, x W1 + b1) W2 + b2, row by row.
num::Var feed_forward(num::Var x, const FeedForwardWeights<num::Var>& weights);

// LayerNorm(x + f(x)).
num::Var sublayer_connect(num::Var x, num::Var fx, const NormWeights<num::Var>& norm, double eps);

struct EncoderOutput {
    num::Var states;                    // fused length x d_model
    std::vector<std::uint8_t> key_valid;  // 0 marks padding
};

EncoderOutput encode(num::Var input, std::span<const std::uint8_t> key_valid, const ParameterVars& vars,
                     const ModelConfig& config, const ForwardContext& ctx);

// Embeds, applies input dropout and encodes one review.
EncoderOutput encode_review(const ParameterVars& vars, std::span<const TokenId> src, TokenId rating, TokenId category,
                            const ModelConfig& config, const ForwardContext& ctx);

// Logits (T x vocab) for a <sos>-shifted target prefix under a causal mask.
// Throws ValidationError if the prefix exceeds max_tgt_len.
num::Var decoder_forward(std::span<const TokenId> tgt_input, const EncoderOutput& memory, const ParameterVars& vars,
                         const ModelConfig& config, const ForwardContext& ctx);

// Records padded with ⟨pad⟩ to common lengths.
struct Batch {
    std::size_t size = 0;
    std::size_t src_len = 0;
    std::size_t tgt_len = 0;  // decoder input length (target length - 1)
    std::vector<TokenId> src;        // size x src_len
    std::vector<std::size_t> src_lengths;
    std::vector<TokenId> tgt_input;  // size x tgt_len
    std::vector<TokenId> tgt_label;  // size x tgt_len, ⟨pad⟩ beyond each target
    std::vector<TokenId> rating;
    std::vector<TokenId> category;
};

Batch make_batch(std::span<const corpus::EncodedRecord> records);

struct ForwardResult {
    num::Var loss;                  // mean cross entropy over non-pad target positions
    std::vector<num::Var> logits;   // per record, tgt_len x vocab
};

ForwardResult forward_training(const Batch& batch, const ParameterVars& vars, const ModelConfig& config,
                               const ForwardContext& ctx);

}  // namespace trrgen::model
