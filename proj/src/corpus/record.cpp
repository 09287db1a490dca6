#include "trrgen/corpus/record.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trrgen/error.hpp"

namespace trrgen::corpus {

namespace {

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

int parse_rating(const nlohmann::json& value, std::size_t line) {
    if (value.is_number_integer()) return value.get<int>();
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        int rating = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), rating);
        if (ec == std::errc() && ptr == s.data() + s.size()) return rating;
    }
    throw ParseError("line " + std::to_string(line) + ": rating must be an integer");
}

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw ParseError("line " + std::to_string(line) + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

ReviewRecord parse_jsonl_line(std::string_view text, std::size_t line) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ParseError("line " + std::to_string(line) + ": expected a JSON object");
    ReviewRecord r;
    r.app_name = required_string(obj, "app_name", line);
    r.category = required_string(obj, "category", line);
    auto rating = obj.find("rating");
    if (rating == obj.end()) throw ParseError("line " + std::to_string(line) + ": missing field 'rating'");
    r.rating = parse_rating(*rating, line);
    r.review_text = required_string(obj, "review", line);
    if (auto resp = obj.find("response"); resp != obj.end() && !resp->is_null()) {
        if (!resp->is_string()) throw ParseError("line " + std::to_string(line) + ": 'response' must be a string");
        r.response_text = resp->get<std::string>();
    }
    return r;
}

ReviewRecord parse_tsv_line(std::string_view text, std::size_t line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = text.find('\t', start);
        cols.push_back(text.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    if (cols.size() == 4) cols.emplace_back();
    if (cols.size() != 5)
        throw ParseError("line " + std::to_string(line) + ": expected 5 tab-separated columns, got " +
                         std::to_string(cols.size()));
    ReviewRecord r;
    r.app_name = cols[0];
    r.category = cols[1];
    int rating = 0;
    auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), rating);
    if (ec != std::errc() || ptr != cols[2].data() + cols[2].size())
        throw ParseError("line " + std::to_string(line) + ": rating must be an integer");
    r.rating = rating;
    r.review_text = cols[3];
    r.response_text = cols[4];
    return r;
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "tsv") return CorpusFormat::tsv;
    throw ConfigError("unknown corpus format '" + std::string(name) + "' (expected jsonl or tsv)");
}

CorpusFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".tsv" ? CorpusFormat::tsv : CorpusFormat::jsonl;
}

void validate_record(const ReviewRecord& record) {
    if (record.rating < 1 || record.rating > 5)
        throw ValidationError("rating " + std::to_string(record.rating) + " outside [1,5]");
    if (is_blank(record.review_text)) throw ValidationError("review text is empty");
    if (is_blank(record.category)) throw ValidationError("category is empty");
}

std::vector<ReviewRecord> parse_corpus(std::string_view content, CorpusFormat format) {
    std::vector<ReviewRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        pos = eol + 1;
        if (is_blank(line)) continue;
        ReviewRecord r = format == CorpusFormat::jsonl ? parse_jsonl_line(line, line_no) : parse_tsv_line(line, line_no);
        try {
            validate_record(r);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ReviewRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_corpus(buffer.str(), format);
}

std::string format_record(const ReviewRecord& record, CorpusFormat format) {
    if (format == CorpusFormat::tsv) {
        for (const std::string* field : {&record.app_name, &record.category, &record.review_text, &record.response_text})
            if (field->find_first_of("\t\n") != std::string::npos)
                throw ValidationError("TSV fields cannot contain tabs or newlines");
        return record.app_name + '\t' + record.category + '\t' + std::to_string(record.rating) + '\t' +
               record.review_text + '\t' + record.response_text;
    }
    nlohmann::ordered_json obj;
    obj["app_name"] = record.app_name;
    obj["category"] = record.category;
    obj["rating"] = record.rating;
    obj["review"] = record.review_text;
    obj["response"] = record.response_text;
    return obj.dump();
}

void save_corpus(const std::filesystem::path& path, const std::vector<ReviewRecord>& records, CorpusFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file " + path.string());
    for (const auto& r : records) out << format_record(r, format) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace trrgen::corpus
