#include "trrgen/corpus/ads.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "trrgen/error.hpp"

namespace trrgen::corpus {

NgramReport ad_report(const std::vector<ReviewRecord>& records, const PreprocessConfig& config) {
    config.validate();
    NgramReport report;
    report.ngram_n = config.ad_ngram_n;
    report.response_count = records.size();

    struct Tally {
        std::size_t count = 0;
        std::size_t first = 0;
    };
    std::map<Expression, Tally> tallies;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const std::string_view text = records[r].response_text;
        for (const SentenceSpan& s : split_sentences(text)) {
            auto expr = mid_ngram(tokenize(text.substr(s.begin, s.end - s.begin)), config.ad_ngram_n);
            if (!expr) continue;
            auto [it, inserted] = tallies.try_emplace(std::move(*expr));
            if (inserted) it->second.first = r;
            ++it->second.count;
        }
    }

    const double flag_at = config.ad_flag_threshold * static_cast<double>(report.response_count);
    report.entries.reserve(tallies.size());
    for (auto& [expr, tally] : tallies)
        report.entries.push_back({expr, tally.count, tally.first, static_cast<double>(tally.count) >= flag_at});
    // Stable over the map's lexicographic order, so ties stay sorted by expression.
    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](const NgramEntry& a, const NgramEntry& b) { return a.count > b.count; });
    return report;
}

std::string format_ad_report(const NgramReport& report, bool flagged_only) {
    std::string out;
    for (const auto& e : report.entries) {
        if (flagged_only && !e.flagged) continue;
        out += std::to_string(e.count);
        out += '\t';
        out += join_tokens(e.expression);
        out += '\n';
    }
    return out;
}

Blocklist::Blocklist(std::vector<Expression> expressions) {
    for (auto& e : expressions) {
        if (e.empty()) continue;
        if (n_ == 0) n_ = e.size();
        if (e.size() != n_)
            throw ValidationError("blocklist expressions must all have " + std::to_string(n_) + " tokens, got " +
                                  std::to_string(e.size()) + ": '" + join_tokens(e) + "'");
        expressions_.insert(std::move(e));
    }
}

Blocklist parse_blocklist(std::string_view content) {
    std::vector<Expression> expressions;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        Expression e;
        std::istringstream words(line);
        std::string w;
        while (words >> w) e.push_back(w);
        if (!e.empty()) expressions.push_back(std::move(e));
    }
    return Blocklist(std::move(expressions));
}

Blocklist load_blocklist(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open blocklist " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_blocklist(buffer.str());
}

std::vector<ReviewRecord> filter_ads(const std::vector<ReviewRecord>& records, const Blocklist& blocklist) {
    if (blocklist.empty()) return records;
    std::vector<ReviewRecord> kept;
    kept.reserve(records.size());
    for (const auto& record : records) {
        const std::string_view text = record.response_text;
        std::string filtered;
        bool removed = false;
        for (const SentenceSpan& s : split_sentences(text)) {
            auto expr = mid_ngram(tokenize(text.substr(s.begin, s.end - s.begin)), blocklist.ngram_n());
            if (expr && blocklist.contains(*expr)) {
                removed = true;
                continue;
            }
            filtered.append(text.substr(s.begin, s.next - s.begin));
        }
        if (!removed) {
            kept.push_back(record);
            continue;
        }
        while (!filtered.empty() && std::isspace(static_cast<unsigned char>(filtered.back()))) filtered.pop_back();
        if (filtered.empty()) continue;
        ReviewRecord copy = record;
        copy.response_text = std::move(filtered);
        kept.push_back(std::move(copy));
    }
    return kept;
}

}  // namespace trrgen::corpus
