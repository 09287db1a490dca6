#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trrgen/corpus/encode.hpp"
#include "trrgen/corpus/text.hpp"
#include "trrgen/generation/decode.hpp"
#include "trrgen/model/config.hpp"
#include "trrgen/numerics/adam.hpp"

namespace trrgen::app {

// Everything a run depends on besides the dataset files. Every field has a
// flat key (see run_config_keys()) usable in config files and as a --key flag.
struct RunConfig {
    model::ModelConfig model;
    corpus::PreprocessConfig preprocess;
    gen::DecodeConfig decode;
    num::AdamConfig optimizer;

    // Placeholder patterns; empty disables a rule.
    std::string email_pattern;
    std::string url_pattern;
    std::string user_id_pattern;
    std::string app_name_pattern;
    bool filter_ads = false;
    std::string blocklist;

    std::size_t min_freq = 2;

    std::string data;
    std::string train;
    std::string valid;
    std::string test;
    std::string vocab;
    std::string format = "jsonl";
    corpus::SplitRatios split;

    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::size_t validate_every = 1;
    std::size_t patience = 5;
    // Stop once an epoch's mean training loss drops below this (0 disables).
    double min_train_loss = 0.0;
    std::uint64_t seed = 1;

    RunConfig();

    // Preprocess settings with placeholder rules rebuilt from the patterns.
    corpus::PreprocessConfig preprocess_config() const;
    corpus::EncodeLimits encode_limits() const;
    // Model settings with seed and vocabulary size filled in.
    model::ModelConfig model_config(std::size_t vocab_size) const;

    void validate() const;
};

const std::vector<std::string>& run_config_keys();
bool is_run_config_key(std::string_view key);

// Throws ConfigError for unknown keys or unparsable values.
void set_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_value(const RunConfig& config, std::string_view key);

// "key = value" lines; '#' starts a comment; blank lines ignored.
void apply_config_text(RunConfig& config, std::string_view text);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
std::string format_config(const RunConfig& config);

// Key -> string value object; lossless for every field.
nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

// TRRGEN_SEED, when set, replaces the seed.
void apply_environment(RunConfig& config);

// FNV-1a over format_config, as 16 hex digits.
std::string config_digest(const RunConfig& config);

}  // namespace trrgen::app
