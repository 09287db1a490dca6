#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "trrgen/corpus/encode.hpp"
#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/model/parameters.hpp"

namespace trrgen::gen {

using corpus::TokenId;

enum class DecodeStrategy { greedy, beam };

DecodeStrategy parse_decode_strategy(std::string_view name);
std::string_view to_string(DecodeStrategy strategy);

struct DecodeConfig {
    DecodeStrategy strategy = DecodeStrategy::greedy;
    std::size_t beam_width = 4;
    // 0 means the model's max_tgt_len.
    std::size_t max_len = 0;
    // Final beam ranking uses score / length^length_penalty; 0 disables it.
    double length_penalty = 0.0;

    void validate() const;
};

// Emitted tokens without ⟨sos⟩/⟨eos⟩, and the summed log-probability of the
// emitted sequence including the closing ⟨eos⟩ when one was produced.
struct Hypothesis {
    std::vector<TokenId> tokens;
    double log_prob = 0.0;
    bool finished = false;
};

// Argmax of the next-token log-probabilities until ⟨eos⟩ or max_len steps;
// ties go to the lowest id.
Hypothesis greedy_decode(const model::Model& model, const corpus::EncodedRecord& input, const DecodeConfig& config);

// Beam search over summed log-probabilities. Hypotheses that emit ⟨eos⟩ are
// retired and compared with the survivors at the end. Width 1 reproduces
// greedy_decode token for token.
Hypothesis beam_decode(const model::Model& model, const corpus::EncodedRecord& input, const DecodeConfig& config);

// Dispatches on config.strategy.
Hypothesis decode(const model::Model& model, const corpus::EncodedRecord& input, const DecodeConfig& config);

// Log-probability the model assigns to `tokens` followed by ⟨eos⟩ (or not,
// when `closed` is false).
double sequence_log_prob(const model::Model& model, const corpus::EncodedRecord& input,
                         const std::vector<TokenId>& tokens, bool closed);

// Space-joined tokens; placeholders are emitted verbatim.
std::string postprocess(const std::vector<TokenId>& ids, const corpus::Vocabulary& vocab);

}  // namespace trrgen::gen
