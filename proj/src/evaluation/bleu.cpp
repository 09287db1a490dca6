#include "trrgen/evaluation/bleu.hpp"

#include <cmath>
#include <random>
#include <string_view>
#include <unordered_map>

#include "trrgen/error.hpp"

namespace trrgen::eval {

namespace {

std::string ngram_key(const Tokens& tokens, std::size_t start, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) key += '\x1f';
        key += tokens[start + i];
    }
    return key;
}

std::unordered_map<std::string, std::size_t> ngram_histogram(const Tokens& tokens, std::size_t n) {
    std::unordered_map<std::string, std::size_t> hist;
    if (tokens.size() < n) return hist;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++hist[ngram_key(tokens, i, n)];
    return hist;
}

void check_corpus(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
    if (candidates.size() != references.size())
        throw ValidationError("BLEU: " + std::to_string(candidates.size()) + " candidates but " +
                              std::to_string(references.size()) + " references");
    if (candidates.empty()) throw ValidationError("BLEU: empty corpus");
}

NgramCounts corpus_counts(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
    check_corpus(candidates, references);
    NgramCounts total;
    for (std::size_t i = 0; i < candidates.size(); ++i) total += count_ngrams(candidates[i], references[i]);
    return total;
}

}  // namespace

NgramCounts& NgramCounts::operator+=(const NgramCounts& other) {
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
        matches[n] += other.matches[n];
        totals[n] += other.totals[n];
    }
    candidate_length += other.candidate_length;
    reference_length += other.reference_length;
    return *this;
}

NgramCounts count_ngrams(const Tokens& candidate, const Tokens& reference) {
    NgramCounts counts;
    counts.candidate_length = candidate.size();
    counts.reference_length = reference.size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
        if (candidate.size() < n) continue;
        const auto ref = ngram_histogram(reference, n);
        for (const auto& [gram, count] : ngram_histogram(candidate, n)) {
            counts.totals[n - 1] += count;
            if (auto it = ref.find(gram); it != ref.end()) counts.matches[n - 1] += std::min(count, it->second);
        }
    }
    return counts;
}

double modified_precision(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                          std::size_t n) {
    if (n < 1 || n > kMaxOrder) throw ValidationError("n-gram order must lie in [1,4]");
    const NgramCounts c = corpus_counts(candidates, references);
    if (c.totals[n - 1] == 0) return 0.0;
    return static_cast<double>(c.matches[n - 1]) / static_cast<double>(c.totals[n - 1]);
}

double brevity_penalty(std::size_t candidate_length, std::size_t reference_length) {
    if (candidate_length == 0) return 0.0;
    if (candidate_length >= reference_length) return 1.0;
    return std::exp(1.0 - static_cast<double>(reference_length) / static_cast<double>(candidate_length));
}

BleuReport bleu_from_counts(const NgramCounts& counts, std::size_t max_order) {
    if (max_order < 1 || max_order > kMaxOrder) throw ValidationError("BLEU order must lie in [1,4]");
    BleuReport report;
    report.max_order = max_order;
    report.counts = counts;
    report.brevity_penalty = brevity_penalty(counts.candidate_length, counts.reference_length);
    bool any_zero = false;
    double log_sum = 0.0;
    for (std::size_t n = 0; n < max_order; ++n) {
        const double p = counts.totals[n] == 0
                             ? 0.0
                             : static_cast<double>(counts.matches[n]) / static_cast<double>(counts.totals[n]);
        report.precisions[n] = p;
        if (p == 0.0) any_zero = true;
        else log_sum += std::log(p);
    }
    for (std::size_t n = max_order; n < kMaxOrder; ++n)
        report.precisions[n] = counts.totals[n] == 0 ? 0.0
                                                     : static_cast<double>(counts.matches[n]) /
                                                           static_cast<double>(counts.totals[n]);
    report.bleu =
        any_zero ? 0.0 : 100.0 * report.brevity_penalty * std::exp(log_sum / static_cast<double>(max_order));
    return report;
}

BleuReport corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                       std::size_t max_order) {
    return bleu_from_counts(corpus_counts(candidates, references), max_order);
}

double sentence_bleu(const Tokens& candidate, const Tokens& reference, bool smooth, std::size_t max_order) {
    if (max_order < 1 || max_order > kMaxOrder) throw ValidationError("BLEU order must lie in [1,4]");
    const NgramCounts c = count_ngrams(candidate, reference);
    double log_sum = 0.0;
    for (std::size_t n = 0; n < max_order; ++n) {
        double num = static_cast<double>(c.matches[n]);
        double den = static_cast<double>(c.totals[n]);
        if (smooth && n > 0) {
            num += 1.0;
            den += 1.0;
        }
        if (num == 0.0 || den == 0.0) return 0.0;
        log_sum += std::log(num / den);
    }
    return 100.0 * brevity_penalty(c.candidate_length, c.reference_length) *
           std::exp(log_sum / static_cast<double>(max_order));
}

std::vector<std::string> random_selection_baseline(const std::vector<std::string>& training_responses,
                                                   std::size_t test_size, std::uint64_t seed) {
    if (training_responses.empty()) throw ValidationError("random selection needs a non-empty response pool");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, training_responses.size() - 1);
    std::vector<std::string> out;
    out.reserve(test_size);
    for (std::size_t i = 0; i < test_size; ++i) out.push_back(training_responses[pick(rng)]);
    return out;
}

}  // namespace trrgen::eval
