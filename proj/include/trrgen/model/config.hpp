#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace trrgen::model {

// How the rating vector r and category vector c join the token embeddings.
enum class FusionVariant {
    vanilla,        // x_i = w_i + p_i
    rating_only,    // x_i = w_i + r + p_i
    category_only,  // [c, w_i + p_i ...]
    trrgen_concat,  // [c, w_i + r + p_i ...]
    trrgen_sum,     // x_i = w_i + r + c + p_i
    trrgen_order,   // [c, r, w_i + p_i ...]
};

FusionVariant parse_fusion_variant(std::string_view name);
std::string_view to_string(FusionVariant variant);

// Encoder input length for n review tokens: n, n+1 or n+2.
std::size_t fused_length(FusionVariant variant, std::size_t n);
bool uses_rating(FusionVariant variant);
bool uses_category(FusionVariant variant);

struct ModelConfig {
    std::size_t d_model = 256;
    std::size_t n_heads = 4;
    std::size_t n_layers = 1;
    std::size_t d_ff = 1024;
    std::size_t max_src_len = 128;
    std::size_t max_tgt_len = 128;
    FusionVariant fusion_variant = FusionVariant::trrgen_concat;
    double dropout = 0.1;
    std::size_t vocab_size = 0;
    std::uint64_t seed = 1;
    bool tie_output_projection = false;
    double layer_norm_eps = 1e-5;

    std::size_t d_k() const noexcept { return n_heads ? d_model / n_heads : 0; }

    // Throws ConfigError when an invariant fails.
    void validate() const;
};

}  // namespace trrgen::model
