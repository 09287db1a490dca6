#pragma once

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "trrgen/corpus/record.hpp"

namespace trrgen::corpus {

inline constexpr std::string_view kEmailToken = "⟨email⟩";
inline constexpr std::string_view kUrlToken = "⟨url⟩";
inline constexpr std::string_view kAppNameToken = "⟨app_name⟩";
inline constexpr std::string_view kUserNameToken = "⟨user_name⟩";

// Replacement is applied to every regex match, rules in list order.
struct PlaceholderRule {
    std::string name;
    std::string pattern;
    std::string replacement;
};

std::vector<PlaceholderRule> default_placeholder_rules();

struct PreprocessConfig {
    std::vector<PlaceholderRule> placeholder_rules = default_placeholder_rules();
    // Replace literal occurrences of the record's app name with ⟨app_name⟩.
    bool replace_app_name = true;
    bool lowercase = true;
    std::size_t ad_ngram_n = 5;
    double ad_flag_threshold = 0.005;
    std::size_t max_review_tokens = 100;
    std::size_t max_response_tokens = 120;

    void validate() const;
};

// Compiled form of the placeholder rules. Immutable; share freely.
class Normalizer {
public:
    explicit Normalizer(const PreprocessConfig& config);

    // app_name, when non-empty, is replaced case-insensitively at word
    // boundaries (before lowercasing).
    std::string operator()(std::string_view text, std::string_view app_name = {}) const;

private:
    struct CompiledRule {
        std::regex pattern;
        std::string replacement;
    };
    std::vector<CompiledRule> rules_;
    bool replace_app_name_;
    bool lowercase_;
};

std::string normalize_text(std::string_view text, const PreprocessConfig& config);
ReviewRecord normalize_record(const ReviewRecord& record, const Normalizer& normalizer);

// "⟨4⟩" for 4. Throws ValidationError outside [1,5].
std::string rating_token(int rating);
std::string category_token(std::string_view category);

// Whitespace split with ASCII punctuation as standalone tokens. ⟨...⟩
// placeholders stay atomic; an apostrophe between letters stays in its word.
std::vector<std::string> tokenize(std::string_view text);

// Sentence boundaries sit after '.', '!' or '?' followed by whitespace or end
// of text. Segments tile the input: [begin, next) covers the sentence
// [begin, end) plus the whitespace after it.
struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t next = 0;
};
std::vector<SentenceSpan> split_sentences(std::string_view text);

// The n consecutive tokens starting at floor((len - n) / 2), or nothing when
// the sentence is shorter than n.
std::optional<std::vector<std::string>> mid_ngram(const std::vector<std::string>& tokens, std::size_t n);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace trrgen::corpus
