#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "synthetic.hpp"
#include "trrgen/corpus/ads.hpp"
#include "trrgen/corpus/encode.hpp"
#include "trrgen/corpus/record.hpp"
#include "trrgen/corpus/text.hpp"
#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/error.hpp"

using namespace trrgen;
using namespace trrgen::corpus;

namespace {

ReviewRecord rec(std::string review, std::string response, std::string category = "TOOLS", int rating = 3) {
    return {"app", std::move(category), rating, std::move(review), std::move(response)};
}

// Independent count: split on ". " style boundaries by hand and take the
// middle window of every sentence.
std::map<Expression, std::size_t> naive_mid_counts(const std::vector<ReviewRecord>& records, std::size_t n) {
    std::map<Expression, std::size_t> counts;
    for (const auto& r : records) {
        std::vector<std::string> sentence;
        for (const auto& tok : tokenize(r.response_text)) {
            sentence.push_back(tok);
            if (tok == "." || tok == "!" || tok == "?") {
                if (sentence.size() >= n) {
                    const auto start = (sentence.size() - n) / 2;
                    ++counts[Expression(sentence.begin() + static_cast<long>(start),
                                        sentence.begin() + static_cast<long>(start + n))];
                }
                sentence.clear();
            }
        }
        if (sentence.size() >= n) {
            const auto start = (sentence.size() - n) / 2;
            ++counts[Expression(sentence.begin() + static_cast<long>(start),
                                sentence.begin() + static_cast<long>(start + n))];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("corpus loading: jsonl and tsv") {
    const auto recs = parse_corpus(
        "{\"app_name\":\"A\",\"category\":\"GAME\",\"rating\":4,\"review\":\"fun\",\"response\":\"thanks\"}\n\n",
        CorpusFormat::jsonl);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].rating == 4);
    CHECK(recs[0].response_text == "thanks");

    const auto tsv = parse_corpus("A\tGAME\t5\tgreat\tthank you\n", CorpusFormat::tsv);
    REQUIRE(tsv.size() == 1);
    CHECK(tsv[0].category == "GAME");
    CHECK(format_record(tsv[0], CorpusFormat::tsv) == "A\tGAME\t5\tgreat\tthank you");

    CHECK(parse_corpus("", CorpusFormat::jsonl).empty());
    CHECK_THROWS_AS(parse_corpus("{\"app_name\":\"A\",\"category\":\"G\",\"rating\":9,\"review\":\"x\",\"response\":\"y\"}",
                                 CorpusFormat::jsonl),
                    ValidationError);
    CHECK_THROWS_AS(parse_corpus("{not json", CorpusFormat::jsonl), ParseError);
    CHECK_THROWS_AS(parse_corpus("A\tGAME\t5", CorpusFormat::tsv), ParseError);
    // A missing response column reads as an empty reply (inference input).
    CHECK(parse_corpus("A\tGAME\t5\tno reply", CorpusFormat::tsv)[0].response_text.empty());
    CHECK_THROWS_AS(load_corpus("/nonexistent/file.jsonl", CorpusFormat::jsonl), IoError);
}

TEST_CASE("normalize_text placeholder examples") {
    PreprocessConfig cfg;
    CHECK(normalize_text("Contact me at a.b@x.com", cfg) == "contact me at ⟨email⟩");
    CHECK(normalize_text("see https://example.org/faq now", cfg) == "see ⟨url⟩ now");
    CHECK(normalize_text("", cfg).empty());
    CHECK(normalize_text("hi @some_user", cfg) == "hi ⟨user_name⟩");
    cfg.lowercase = false;
    CHECK(normalize_text("Keep CASE", cfg) == "Keep CASE");
}

TEST_CASE("app name replacement respects word boundaries") {
    PreprocessConfig cfg;
    Normalizer norm(cfg);
    CHECK(norm("Zen and Zenith", "Zen") == "⟨app_name⟩ and zenith");
    CHECK(norm("I like TASK pal", "Task Pal") == "i like ⟨app_name⟩");
    cfg.replace_app_name = false;
    CHECK(Normalizer(cfg)("Zen", "Zen") == "zen");
}

TEST_CASE("preprocessing golden fixture") {
    const auto input = load_corpus(testing::fixture_path("preprocess_input.jsonl"), CorpusFormat::jsonl);
    const auto expected = testing::read_file(testing::fixture_path("preprocess_expected.jsonl"));
    Normalizer norm{PreprocessConfig{}};
    std::string produced;
    for (const auto& r : input) produced += format_record(normalize_record(r, norm), CorpusFormat::jsonl) + "\n";
    CHECK(produced == expected);
}

TEST_CASE("normalize is idempotent on fuzzed strings") {
    std::mt19937_64 rng(2024);
    const std::vector<std::string> pieces = {"Hello", "WORLD", "a@b.co", "x.y@mail.example.org", "https://t.co/x",
                                             "www.site.net/page?q=1", "@user_1", "!", "?", ".", ",", " ", "  ",
                                             "don't", "Zen", "zenith", "⟨url⟩", "ÉCOLE", "123", "\t", "mail@", "@"};
    PreprocessConfig cfg;
    Normalizer norm(cfg);
    for (int i = 0; i < 100; ++i) {
        std::string s;
        const auto parts = 1 + rng() % 12;
        for (std::size_t p = 0; p < parts; ++p) {
            s += pieces[rng() % pieces.size()];
            if (rng() % 2) s += ' ';
        }
        const auto once = norm(s, "Zen");
        CHECK_MESSAGE(norm(once, "Zen") == once, s);
    }
}

TEST_CASE("rating tokens") {
    CHECK(rating_token(4) == "⟨4⟩");
    CHECK(rating_token(1) == "⟨1⟩");
    CHECK_THROWS_AS(rating_token(0), ValidationError);
    CHECK_THROWS_AS(rating_token(6), ValidationError);
}

TEST_CASE("tokenize") {
    CHECK(tokenize("thanks!") == std::vector<std::string>{"thanks", "!"});
    CHECK(tokenize("send ⟨email⟩ now") == std::vector<std::string>{"send", "⟨email⟩", "now"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("don't stop.") == std::vector<std::string>{"don't", "stop", "."});
    CHECK(tokenize("see ⟨url⟩.") == std::vector<std::string>{"see", "⟨url⟩", "."});
}

TEST_CASE("mid n-gram") {
    const std::vector<std::string> seven = {"a", "b", "c", "d", "e", "f", "g"};
    CHECK(*mid_ngram(seven, 5) == std::vector<std::string>{"b", "c", "d", "e", "f"});
    const std::vector<std::string> five = {"a", "b", "c", "d", "e"};
    CHECK(*mid_ngram(five, 5) == five);
    const std::vector<std::string> nine = {"1", "2", "3", "4", "5", "6", "7", "8", "9"};
    CHECK(*mid_ngram(nine, 5) == std::vector<std::string>{"3", "4", "5", "6", "7"});
    CHECK_FALSE(mid_ngram({"a", "b", "c"}, 5).has_value());
}

TEST_CASE("ad report on the planted fixture") {
    const auto records = load_corpus(testing::fixture_path("ads.jsonl"), CorpusFormat::jsonl);
    PreprocessConfig cfg;
    cfg.ad_flag_threshold = 0.2;
    const auto report = ad_report(records, cfg);
    const Expression planted = {"free", "phone", "cleaner", "which", "keeps"};
    auto it = std::find_if(report.entries.begin(), report.entries.end(),
                           [&](const NgramEntry& e) { return e.expression == planted; });
    REQUIRE(it != report.entries.end());
    CHECK(it->count == 10);
    CHECK(it->flagged);

    // Every count matches an independent tally, and the order is by count.
    const auto oracle = naive_mid_counts(records, 5);
    CHECK(report.entries.size() == oracle.size());
    for (const auto& e : report.entries) CHECK(oracle.at(e.expression) == e.count);
    for (std::size_t i = 1; i < report.entries.size(); ++i)
        CHECK(report.entries[i - 1].count >= report.entries[i].count);

    CHECK(ad_report({}, cfg).entries.empty());
}

TEST_CASE("ad report planted sentence and flag threshold") {
    std::vector<ReviewRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(rec("r", "⟨app_name⟩ is a free phone cleaner which helps ."));
    auto report = ad_report(records, PreprocessConfig{});
    REQUIRE_FALSE(report.entries.empty());
    CHECK(report.entries[0].count == 10);
    CHECK(join_tokens(report.entries[0].expression) == "a free phone cleaner which");

    std::vector<ReviewRecord> hundred;
    for (int i = 0; i < 100; ++i) {
        std::string response = "plain reply number " + std::to_string(i) + " .";
        if (i < 7) response += " planted alpha beta gamma delta .";
        if (i >= 50 && i < 53) response += " rare one two three four .";
        hundred.push_back(rec("r", response));
    }
    PreprocessConfig cfg;
    cfg.ad_flag_threshold = 0.05;
    report = ad_report(hundred, cfg);
    for (const auto& e : report.entries) {
        if (join_tokens(e.expression) == "planted alpha beta gamma delta") CHECK(e.flagged);
        if (join_tokens(e.expression) == "rare one two three four") CHECK_FALSE(e.flagged);
    }
}

TEST_CASE("filter_ads") {
    const auto records = load_corpus(testing::fixture_path("ads.jsonl"), CorpusFormat::jsonl);
    CHECK(filter_ads(records, Blocklist{}) == records);

    const auto blocklist = parse_blocklist("free phone cleaner which keeps\n");
    const auto filtered = filter_ads(records, blocklist);
    REQUIRE(filtered.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(filtered[i].review_text == records[i].review_text);
        CHECK(filtered[i].response_text.find("cleaner") == std::string::npos);
        if (i % 4 != 0) {
            CHECK(filtered[i].response_text == records[i].response_text);
        } else {
            // The surrounding sentences survive byte for byte.
            const auto& original = records[i].response_text;
            const auto first = original.substr(0, original.find('.') + 1);
            CHECK(filtered[i].response_text.rfind(first, 0) == 0);
            CHECK(filtered[i].response_text.size() < original.size());
        }
    }

    const std::vector<ReviewRecord> only_ad = {rec("r", "⟨app_name⟩ is a free phone cleaner which keeps you safe.")};
    CHECK(filter_ads(only_ad, blocklist).empty());
    CHECK_THROWS_AS(parse_blocklist("one two\nthree four five\n"), ValidationError);
}

TEST_CASE("vocabulary construction") {
    const std::vector<ReviewRecord> records = {rec("good app good", "thanks a lot", "TOOLS"),
                                               rec("bad app", "thanks", "GAME")};
    const auto vocab = build_vocabulary(records, 2);
    CHECK(vocab.token(Vocabulary::kPad) == "⟨pad⟩");
    CHECK(vocab.token(Vocabulary::kEos) == "⟨eos⟩");
    CHECK(vocab.rating_id(4) == vocab.id("⟨4⟩"));
    CHECK(vocab.has_category("TOOLS"));
    CHECK(vocab.has_category("GAME"));
    CHECK(vocab.find("⟨cat:GAME⟩").has_value());
    CHECK(vocab.id("bad") == Vocabulary::kUnk);
    CHECK(vocab.id("good") != Vocabulary::kUnk);
    CHECK(vocab.id("app") != Vocabulary::kUnk);
    CHECK_THROWS_AS(vocab.category_id("FOO"), ValidationError);

    const auto empty = build_vocabulary({}, 2);
    CHECK(empty.size() == Vocabulary::kReservedCount);
}

TEST_CASE("vocabulary is a bijection and round-trips through its file") {
    const auto records = load_corpus(testing::fixture_path("overfit32.jsonl"), CorpusFormat::jsonl);
    const auto vocab = build_vocabulary(records, 1);
    for (TokenId id = 0; id < static_cast<TokenId>(vocab.size()); ++id) {
        CHECK(vocab.id(vocab.token(id)) == id);
        CHECK(vocab.decode(vocab.encode({vocab.token(id)})) == std::vector<std::string>{vocab.token(id)});
    }
    const auto again = parse_vocabulary(format_vocabulary(vocab));
    CHECK(again == vocab);
    CHECK(format_vocabulary(build_vocabulary(records, 1)) == format_vocabulary(vocab));
    CHECK_THROWS(Vocabulary::from_tokens({"a", "b"}));
}

TEST_CASE("encode_record") {
    const std::vector<ReviewRecord> records = {rec("it is ok ok", "ok", "TOOLS", 4)};
    const auto vocab = build_vocabulary(records, 1);
    const auto e = encode_record(records[0], vocab, {});
    CHECK(e.tgt == std::vector<TokenId>{Vocabulary::kSos, vocab.id("ok"), Vocabulary::kEos});
    CHECK(e.rating == vocab.id("⟨4⟩"));
    CHECK(e.category == vocab.category_id("TOOLS"));

    std::string long_review;
    for (int i = 0; i < 200; ++i) long_review += "ok ";
    const auto truncated = encode_record(rec(long_review, "ok"), vocab, {60, 120});
    CHECK(truncated.src.size() == 60);
    const auto short_tgt = encode_record(rec("ok", "ok ok ok ok ok"), vocab, {100, 3});
    CHECK(short_tgt.tgt.size() == 3);

    CHECK_THROWS_AS(encode_record(rec("ok", "ok", "FOO"), vocab, {}), ValidationError);
}

TEST_CASE("split_corpus partitions deterministically") {
    std::vector<ReviewRecord> records;
    for (int i = 0; i < 97; ++i) records.push_back(rec("review " + std::to_string(i), "reply"));
    const auto a = split_corpus(records, 5, {});
    const auto b = split_corpus(records, 5, {});
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train.size() + a.valid.size() + a.test.size() == records.size());
    std::vector<std::string> seen;
    for (const auto* part : {&a.train, &a.valid, &a.test})
        for (const auto& r : *part) seen.push_back(r.review_text);
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(seen.size() == records.size());

    const auto c = split_corpus(records, 6, {});
    CHECK(c.train != a.train);
    CHECK_THROWS_AS(split_corpus(records, 1, {0.5, 0.2, 0.2}), ConfigError);
    CHECK_THROWS_AS(split_corpus({records[0], records[1]}, 1, {}), ConfigError);
}
