#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace trrgen::eval {

using Tokens = std::vector<std::string>;

inline constexpr std::size_t kMaxOrder = 4;

// Additive sufficient statistics for corpus BLEU. Merging is associative and
// commutative, so per-pair counts can be reduced in any order.
struct NgramCounts {
    std::array<std::size_t, kMaxOrder> matches{};  // clipped
    std::array<std::size_t, kMaxOrder> totals{};   // candidate n-grams
    std::size_t candidate_length = 0;
    std::size_t reference_length = 0;

    NgramCounts& operator+=(const NgramCounts& other);
    friend bool operator==(const NgramCounts&, const NgramCounts&) = default;
};

// Counts for one candidate against its single reference.
NgramCounts count_ngrams(const Tokens& candidate, const Tokens& reference);

struct BleuReport {
    std::size_t max_order = 4;
    std::array<double, kMaxOrder> precisions{};  // p_1..p_4 in [0,1]
    double brevity_penalty = 0.0;
    double bleu = 0.0;  // scaled to [0, 100]
    NgramCounts counts;
};

// Corpus-level clipped precision p_n. Throws ValidationError if the lists
// differ in length or are empty, or n is outside [1,4].
double modified_precision(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                          std::size_t n);

// 1 if c >= r, exp(1 - r/c) otherwise, and 0 for an empty candidate side.
double brevity_penalty(std::size_t candidate_length, std::size_t reference_length);

BleuReport bleu_from_counts(const NgramCounts& counts, std::size_t max_order = kMaxOrder);

// BP * exp(sum_n ln(p_n) / N) * 100, zero if any p_n is zero. No smoothing.
BleuReport corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                       std::size_t max_order = kMaxOrder);

// Diagnostic single-pair score; `smooth` adds one to numerator and
// denominator of every order above 1.
double sentence_bleu(const Tokens& candidate, const Tokens& reference, bool smooth,
                     std::size_t max_order = kMaxOrder);

// Uniform draws with replacement from the training responses.
std::vector<std::string> random_selection_baseline(const std::vector<std::string>& training_responses,
                                                   std::size_t test_size, std::uint64_t seed);

}  // namespace trrgen::eval
