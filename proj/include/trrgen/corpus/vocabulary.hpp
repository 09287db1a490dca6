#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trrgen/corpus/record.hpp"

namespace trrgen::corpus {

// Token <-> id bijection over one shared review/response inventory.
//
// Layout: ⟨pad⟩ ⟨unk⟩ ⟨sos⟩ ⟨eos⟩ at 0..3, rating tokens ⟨1⟩..⟨5⟩ at 4..8,
// placeholders ⟨email⟩ ⟨url⟩ ⟨app_name⟩ ⟨user_name⟩ at 9..12, then one
// ⟨cat:NAME⟩ per category (sorted), then corpus words by descending
// frequency. Ids are contiguous from 0.
class Vocabulary {
public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kUnk = 1;
    static constexpr TokenId kSos = 2;
    static constexpr TokenId kEos = 3;
    static constexpr TokenId kFirstRating = 4;
    static constexpr std::size_t kReservedCount = 13;

    // Reserved tokens only.
    Vocabulary();

    // Rebuilds from an id-ordered token list; the reserved prefix must match.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    std::optional<TokenId> find(std::string_view token) const;
    // ⟨unk⟩ for out-of-vocabulary tokens.
    TokenId id(std::string_view token) const;
    const std::string& token(TokenId id) const;

    TokenId rating_id(int rating) const;
    bool has_category(std::string_view category) const;
    // Throws ValidationError for categories unseen at build time.
    TokenId category_id(std::string_view category) const;
    std::vector<std::string> categories() const;

    std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const std::vector<TokenId>& ids) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

private:
    friend Vocabulary build_vocabulary(const std::vector<ReviewRecord>&, std::size_t);

    // No-op if already present.
    void add(std::string token);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

// Tokens of review and response text with frequency >= min_freq, plus the
// reserved tokens and one category token per observed category.
Vocabulary build_vocabulary(const std::vector<ReviewRecord>& records, std::size_t min_freq = 2);

// One token per line in id order.
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
std::string format_vocabulary(const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);
Vocabulary parse_vocabulary(std::string_view content);

}  // namespace trrgen::corpus
