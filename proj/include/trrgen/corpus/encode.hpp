#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "trrgen/corpus/record.hpp"
#include "trrgen/corpus/vocabulary.hpp"

namespace trrgen::corpus {

struct EncodedRecord {
    std::vector<TokenId> src;
    // ⟨sos⟩ response ⟨eos⟩, truncated to max_response_tokens.
    std::vector<TokenId> tgt;
    TokenId rating = 0;
    TokenId category = 0;
};

struct EncodeLimits {
    std::size_t max_review_tokens = 100;
    std::size_t max_response_tokens = 120;
};

// Throws ValidationError for an unknown category, a rating outside [1,5] or a
// review with no tokens.
EncodedRecord encode_record(const ReviewRecord& record, const Vocabulary& vocab, const EncodeLimits& limits);

std::vector<EncodedRecord> encode_corpus(const std::vector<ReviewRecord>& records, const Vocabulary& vocab,
                                         const EncodeLimits& limits);

struct SplitRatios {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;
};

struct CorpusSplit {
    std::vector<ReviewRecord> train;
    std::vector<ReviewRecord> valid;
    std::vector<ReviewRecord> test;
};

// Seeded shuffle followed by a cut at round(n * train) and round(n * valid).
// Throws ConfigError if the ratios do not sum to 1 or any part comes out empty.
CorpusSplit split_corpus(const std::vector<ReviewRecord>& records, std::uint64_t seed, const SplitRatios& ratios);

}  // namespace trrgen::corpus
