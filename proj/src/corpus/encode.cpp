#include "trrgen/corpus/encode.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "trrgen/corpus/text.hpp"
#include "trrgen/error.hpp"

namespace trrgen::corpus {

EncodedRecord encode_record(const ReviewRecord& record, const Vocabulary& vocab, const EncodeLimits& limits) {
    if (limits.max_review_tokens < 1 || limits.max_response_tokens < 2)
        throw ConfigError("max_review_tokens must be >= 1 and max_response_tokens >= 2");
    EncodedRecord out;
    out.rating = vocab.rating_id(record.rating);
    out.category = vocab.category_id(record.category);

    auto review = tokenize(record.review_text);
    if (review.empty()) throw ValidationError("review has no tokens");
    if (review.size() > limits.max_review_tokens) review.resize(limits.max_review_tokens);
    out.src = vocab.encode(review);

    out.tgt.push_back(Vocabulary::kSos);
    for (const auto& t : tokenize(record.response_text)) out.tgt.push_back(vocab.id(t));
    out.tgt.push_back(Vocabulary::kEos);
    if (out.tgt.size() > limits.max_response_tokens) out.tgt.resize(limits.max_response_tokens);
    return out;
}

std::vector<EncodedRecord> encode_corpus(const std::vector<ReviewRecord>& records, const Vocabulary& vocab,
                                         const EncodeLimits& limits) {
    std::vector<EncodedRecord> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            out.push_back(encode_record(records[i], vocab, limits));
        } catch (const ValidationError& e) {
            throw ValidationError("record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

CorpusSplit split_corpus(const std::vector<ReviewRecord>& records, std::uint64_t seed, const SplitRatios& ratios) {
    if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must be non-negative and sum to 1");
    const std::size_t n = records.size();
    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
    const auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.valid));
    if (n_train == 0 || n_valid == 0 || n_train + n_valid >= n)
        throw ConfigError("split of " + std::to_string(n) + " records leaves an empty part");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    CorpusSplit split;
    for (std::size_t i = 0; i < n; ++i) {
        auto& part = i < n_train ? split.train : (i < n_train + n_valid ? split.valid : split.test);
        part.push_back(records[order[i]]);
    }
    return split;
}

}  // namespace trrgen::corpus
