#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trrgen::corpus {

using TokenId = std::int32_t;

// One review with its developer reply. response_text may be empty at
// inference time.
struct ReviewRecord {
    std::string app_name;
    std::string category;
    int rating = 0;
    std::string review_text;
    std::string response_text;

    friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

enum class CorpusFormat { jsonl, tsv };

CorpusFormat parse_corpus_format(std::string_view name);
// jsonl unless the extension is .tsv
CorpusFormat format_for_path(const std::filesystem::path& path);

// One record per line; blank lines are skipped. Errors name the 1-based line.
std::vector<ReviewRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<ReviewRecord> parse_corpus(std::string_view content, CorpusFormat format);

std::string format_record(const ReviewRecord& record, CorpusFormat format);
void save_corpus(const std::filesystem::path& path, const std::vector<ReviewRecord>& records, CorpusFormat format);

// Throws ValidationError when rating is outside [1,5] or review/category are blank.
void validate_record(const ReviewRecord& record);

}  // namespace trrgen::corpus
