#include "trrgen/corpus/text.hpp"

#include <algorithm>

#include "trrgen/error.hpp"

namespace trrgen::corpus {

namespace {

constexpr std::string_view kOpen = "⟨";
constexpr std::string_view kClose = "⟩";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && u > 0x20 && u != 0x7f && !is_ascii_alnum(c) && c != '_';
}
char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Word character for app-name boundaries: ASCII alnum, underscore, or any byte
// of a multi-byte sequence (which covers the placeholder brackets).
bool is_word_byte(char c) { return is_ascii_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80; }

std::string replace_literal_ci(std::string_view text, std::string_view needle, std::string_view replacement) {
    std::string out;
    if (needle.empty()) return std::string(text);
    std::size_t i = 0;
    while (i < text.size()) {
        bool match = i + needle.size() <= text.size();
        for (std::size_t k = 0; match && k < needle.size(); ++k)
            match = ascii_lower(text[i + k]) == ascii_lower(needle[k]);
        if (match) {
            const bool left_ok = i == 0 || !is_word_byte(text[i - 1]) || !is_word_byte(needle.front());
            const std::size_t end = i + needle.size();
            const bool right_ok = end == text.size() || !is_word_byte(text[end]) || !is_word_byte(needle.back());
            if (left_ok && right_ok) {
                out += replacement;
                i = end;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<PlaceholderRule> default_placeholder_rules() {
    return {
        {"email", R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})", std::string(kEmailToken)},
        {"url", R"((https?://|www\.)[^\s]*[^\s.,;:!?)'"])", std::string(kUrlToken)},
        {"user_id", R"(@[A-Za-z0-9_]{2,})", std::string(kUserNameToken)},
    };
}

void PreprocessConfig::validate() const {
    if (ad_ngram_n < 1) throw ConfigError("ad_ngram_n must be at least 1");
    if (!(ad_flag_threshold > 0.0 && ad_flag_threshold <= 1.0)) throw ConfigError("ad_flag_threshold must lie in (0, 1]");
    if (max_review_tokens < 1 || max_response_tokens < 2)
        throw ConfigError("max_review_tokens must be >= 1 and max_response_tokens >= 2");
}

Normalizer::Normalizer(const PreprocessConfig& config)
    : replace_app_name_(config.replace_app_name), lowercase_(config.lowercase) {
    for (const auto& rule : config.placeholder_rules) {
        if (rule.pattern.empty()) continue;
        try {
            rules_.push_back({std::regex(rule.pattern, std::regex::ECMAScript | std::regex::optimize), rule.replacement});
        } catch (const std::regex_error& e) {
            throw ConfigError("placeholder rule '" + rule.name + "' has an invalid pattern: " + e.what());
        }
    }
}

std::string Normalizer::operator()(std::string_view text, std::string_view app_name) const {
    std::string out(text);
    for (const auto& rule : rules_)
        out = std::regex_replace(out, rule.pattern, rule.replacement);
    if (replace_app_name_) {
        const std::string_view name = trim(app_name);
        if (!name.empty()) out = replace_literal_ci(out, name, kAppNameToken);
    }
    if (lowercase_) std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

std::string normalize_text(std::string_view text, const PreprocessConfig& config) { return Normalizer(config)(text); }

ReviewRecord normalize_record(const ReviewRecord& record, const Normalizer& normalizer) {
    ReviewRecord out = record;
    out.review_text = normalizer(record.review_text, record.app_name);
    out.response_text = normalizer(record.response_text, record.app_name);
    return out;
}

std::string rating_token(int rating) {
    if (rating < 1 || rating > 5) throw ValidationError("rating " + std::to_string(rating) + " outside [1,5]");
    return std::string(kOpen) + std::to_string(rating) + std::string(kClose);
}

std::string category_token(std::string_view category) {
    return std::string(kOpen) + "cat:" + std::string(category) + std::string(kClose);
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) tokens.push_back(std::move(word));
        word.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (is_space(c)) {
            flush();
            ++i;
            continue;
        }
        if (text.substr(i, kOpen.size()) == kOpen) {
            const std::size_t close = text.find(kClose, i + kOpen.size());
            const std::size_t stop = close == std::string_view::npos ? close : close + kClose.size();
            const std::string_view candidate = text.substr(i, stop == std::string_view::npos ? 0 : stop - i);
            if (!candidate.empty() && std::none_of(candidate.begin(), candidate.end(), is_space)) {
                flush();
                tokens.emplace_back(candidate);
                i = stop;
                continue;
            }
            flush();
            tokens.emplace_back(kOpen);
            i += kOpen.size();
            continue;
        }
        if (is_ascii_punct(c)) {
            const bool inner_apostrophe =
                c == '\'' && !word.empty() && i + 1 < text.size() && is_ascii_alnum(text[i + 1]);
            if (inner_apostrophe) {
                word += c;
            } else {
                flush();
                tokens.emplace_back(1, c);
            }
            ++i;
            continue;
        }
        word += c;
        ++i;
    }
    flush();
    return tokens;
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
    std::vector<SentenceSpan> spans;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (i + 1 < text.size() && !is_space(text[i + 1])) continue;
        std::size_t next = i + 1;
        while (next < text.size() && is_space(text[next])) ++next;
        spans.push_back({begin, i + 1, next});
        begin = next;
        i = next - 1;
    }
    if (begin < text.size()) {
        std::size_t end = text.size();
        while (end > begin && is_space(text[end - 1])) --end;
        if (end > begin) spans.push_back({begin, end, text.size()});
        else if (!spans.empty()) spans.back().next = text.size();
    }
    return spans;
}

std::optional<std::vector<std::string>> mid_ngram(const std::vector<std::string>& tokens, std::size_t n) {
    if (n == 0 || tokens.size() < n) return std::nullopt;
    const std::size_t start = (tokens.size() - n) / 2;
    return std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(start + n));
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace trrgen::corpus
