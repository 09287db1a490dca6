#include "trrgen/corpus/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "trrgen/corpus/text.hpp"
#include "trrgen/error.hpp"

namespace trrgen::corpus {

namespace {

const std::vector<std::string>& reserved_tokens() {
    static const std::vector<std::string> tokens = [] {
        std::vector<std::string> t{"⟨pad⟩", "⟨unk⟩", "⟨sos⟩", "⟨eos⟩"};
        for (int r = 1; r <= 5; ++r) t.push_back(rating_token(r));
        for (auto p : {kEmailToken, kUrlToken, kAppNameToken, kUserNameToken}) t.emplace_back(p);
        return t;
    }();
    return tokens;
}

constexpr std::string_view kCategoryPrefix = "⟨cat:";

}  // namespace

Vocabulary::Vocabulary() {
    for (const auto& t : reserved_tokens()) add(t);
}

void Vocabulary::add(std::string token) {
    if (index_.contains(token)) return;
    index_.emplace(token, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    const auto& reserved = reserved_tokens();
    if (tokens.size() < reserved.size() || !std::equal(reserved.begin(), reserved.end(), tokens.begin()))
        throw ValidationError("vocabulary does not start with the reserved token layout");
    Vocabulary v;
    for (std::size_t i = reserved.size(); i < tokens.size(); ++i) {
        if (tokens[i].empty()) throw ValidationError("vocabulary contains an empty token at id " + std::to_string(i));
        if (v.index_.contains(tokens[i]))
            throw ValidationError("vocabulary token '" + tokens[i] + "' appears twice");
        v.add(std::move(tokens[i]));
    }
    return v;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TokenId Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnk); }

const std::string& Vocabulary::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw ValidationError("token id " + std::to_string(id) + " outside vocabulary of " +
                              std::to_string(tokens_.size()));
    return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::rating_id(int rating) const {
    rating_token(rating);  // range check
    return kFirstRating + rating - 1;
}

bool Vocabulary::has_category(std::string_view category) const {
    return index_.contains(category_token(category));
}

TokenId Vocabulary::category_id(std::string_view category) const {
    auto id = find(category_token(category));
    if (!id) throw ValidationError("unknown category '" + std::string(category) + "'");
    return *id;
}

std::vector<std::string> Vocabulary::categories() const {
    std::vector<std::string> out;
    for (const auto& t : tokens_)
        if (t.starts_with(kCategoryPrefix) && t.size() > kCategoryPrefix.size() + 3)
            out.push_back(t.substr(kCategoryPrefix.size(), t.size() - kCategoryPrefix.size() - 3));
    return out;
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<TokenId>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (TokenId i : ids) out.push_back(token(i));
    return out;
}

Vocabulary build_vocabulary(const std::vector<ReviewRecord>& records, std::size_t min_freq) {
    Vocabulary vocab;
    std::vector<std::string> categories;
    std::map<std::string, std::size_t> freq;
    for (const auto& r : records) {
        categories.push_back(r.category);
        for (const std::string* text : {&r.review_text, &r.response_text})
            for (auto& t : tokenize(*text)) ++freq[std::move(t)];
    }
    std::sort(categories.begin(), categories.end());
    categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
    for (const auto& c : categories) vocab.add(category_token(c));

    std::vector<std::pair<std::string, std::size_t>> words(freq.begin(), freq.end());
    std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [word, count] : words)
        if (count >= min_freq) vocab.add(word);
    return vocab;
}

std::string format_vocabulary(const Vocabulary& vocab) {
    std::string out;
    for (const auto& t : vocab.tokens()) {
        out += t;
        out += '\n';
    }
    return out;
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary " + path.string());
    out << format_vocabulary(vocab);
}

Vocabulary parse_vocabulary(std::string_view content) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        tokens.emplace_back(line);
        pos = eol + 1;
    }
    return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_vocabulary(buffer.str());
}

}  // namespace trrgen::corpus
