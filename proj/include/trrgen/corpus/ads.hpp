#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "trrgen/corpus/record.hpp"
#include "trrgen/corpus/text.hpp"

namespace trrgen::corpus {

using Expression = std::vector<std::string>;

struct NgramEntry {
    Expression expression;
    std::size_t count = 0;
    // Index of the first record whose response contains the expression.
    std::size_t example_record = 0;
    // count >= ad_flag_threshold * number of responses
    bool flagged = false;
};

// Mid-sentence n-grams of every response sentence, most frequent first
// (ties by expression).
struct NgramReport {
    std::size_t ngram_n = 0;
    std::size_t response_count = 0;
    std::vector<NgramEntry> entries;
};

NgramReport ad_report(const std::vector<ReviewRecord>& records, const PreprocessConfig& config);

// "count<TAB>expression" lines, most frequent first.
std::string format_ad_report(const NgramReport& report, bool flagged_only = false);

// Human-curated expressions to delete; all have the same token count.
class Blocklist {
public:
    Blocklist() = default;
    explicit Blocklist(std::vector<Expression> expressions);

    std::size_t ngram_n() const noexcept { return n_; }
    bool empty() const noexcept { return expressions_.empty(); }
    bool contains(const Expression& e) const { return expressions_.contains(e); }
    std::size_t size() const noexcept { return expressions_.size(); }

private:
    std::size_t n_ = 0;
    std::set<Expression> expressions_;
};

// One expression per line, tokens separated by spaces; blank lines ignored.
Blocklist load_blocklist(const std::filesystem::path& path);
Blocklist parse_blocklist(std::string_view content);

// Deletes response sentences whose mid n-gram is blocklisted and drops records
// left without a response. Review text and surviving sentences are untouched.
std::vector<ReviewRecord> filter_ads(const std::vector<ReviewRecord>& records, const Blocklist& blocklist);

}  // namespace trrgen::corpus
