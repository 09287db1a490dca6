#include "trrgen/model/config.hpp"

#include <array>
#include <utility>

#include "trrgen/error.hpp"

namespace trrgen::model {

namespace {

constexpr std::array<std::pair<FusionVariant, std::string_view>, 6> kVariantNames{{
    {FusionVariant::vanilla, "vanilla"},
    {FusionVariant::rating_only, "rating_only"},
    {FusionVariant::category_only, "category_only"},
    {FusionVariant::trrgen_concat, "trrgen_concat"},
    {FusionVariant::trrgen_sum, "trrgen_sum"},
    {FusionVariant::trrgen_order, "trrgen_order"},
}};

}  // namespace

FusionVariant parse_fusion_variant(std::string_view name) {
    for (const auto& [variant, label] : kVariantNames)
        if (label == name) return variant;
    throw ConfigError("unknown fusion_variant '" + std::string(name) +
                      "' (expected vanilla, rating_only, category_only, trrgen_concat, trrgen_sum or trrgen_order)");
}

std::string_view to_string(FusionVariant variant) {
    for (const auto& [v, label] : kVariantNames)
        if (v == variant) return label;
    throw ConfigError("invalid fusion variant value");
}

std::size_t fused_length(FusionVariant variant, std::size_t n) {
    switch (variant) {
        case FusionVariant::vanilla:
        case FusionVariant::rating_only:
        case FusionVariant::trrgen_sum:
            return n;
        case FusionVariant::category_only:
        case FusionVariant::trrgen_concat:
            return n + 1;
        case FusionVariant::trrgen_order:
            return n + 2;
    }
    throw ConfigError("invalid fusion variant value");
}

bool uses_rating(FusionVariant variant) {
    return variant == FusionVariant::rating_only || variant == FusionVariant::trrgen_concat ||
           variant == FusionVariant::trrgen_sum || variant == FusionVariant::trrgen_order;
}

bool uses_category(FusionVariant variant) {
    return variant == FusionVariant::category_only || variant == FusionVariant::trrgen_concat ||
           variant == FusionVariant::trrgen_sum || variant == FusionVariant::trrgen_order;
}

void ModelConfig::validate() const {
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
        throw ConfigError("d_model (" + std::to_string(d_model) + ") must be a positive multiple of n_heads (" +
                          std::to_string(n_heads) + ")");
    if (d_model % 2 != 0) throw ConfigError("d_model must be even for sinusoidal positions");
    if (n_layers < 1) throw ConfigError("n_layers must be at least 1");
    if (d_ff < 1) throw ConfigError("d_ff must be at least 1");
    if (max_src_len < 2 || max_tgt_len < 2) throw ConfigError("max_src_len and max_tgt_len must be at least 2");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (vocab_size < 1) throw ConfigError("vocab_size must be set");
    if (!(layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
    to_string(fusion_variant);
}

}  // namespace trrgen::model
