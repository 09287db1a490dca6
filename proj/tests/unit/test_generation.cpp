#include <doctest.h>

#include <random>

#include "synthetic.hpp"
#include "trrgen/error.hpp"
#include "trrgen/generation/decode.hpp"
#include "trrgen/model/parameters.hpp"

using namespace trrgen;
using namespace trrgen::gen;
using corpus::Vocabulary;

namespace {

model::Model random_model(std::uint64_t seed, std::size_t vocab = 20) {
    auto cfg = testing::tiny_config(model::FusionVariant::trrgen_concat, vocab);
    cfg.max_tgt_len = 12;
    model::Model m{cfg, model::init_parameters(cfg, seed)};
    // Larger output weights give peaked, seed-dependent distributions.
    for (auto& v : m.params.output_weight.values()) v *= 8.0;
    return m;
}

corpus::EncodedRecord random_input(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return testing::random_records(rng, 1, 20)[0];
}

}  // namespace

TEST_CASE("certain eos gives an empty response for both strategies") {
    auto m = random_model(1);
    m.params.output_bias.fill(0.0);
    m.params.output_bias[Vocabulary::kEos] = 1e3;
    const auto input = random_input(1);
    DecodeConfig cfg;
    const auto g = greedy_decode(m, input, cfg);
    CHECK(g.tokens.empty());
    CHECK(g.finished);
    cfg.strategy = DecodeStrategy::beam;
    const auto b = beam_decode(m, input, cfg);
    CHECK(b.tokens == g.tokens);
}

TEST_CASE("greedy respects max_len and is deterministic") {
    auto m = random_model(2);
    m.params.output_bias[Vocabulary::kEos] = -1e3;
    const auto input = random_input(2);
    DecodeConfig cfg;
    cfg.max_len = 5;
    const auto a = greedy_decode(m, input, cfg);
    CHECK(a.tokens.size() == 5);
    CHECK_FALSE(a.finished);
    CHECK(greedy_decode(m, input, cfg).tokens == a.tokens);
    CHECK(greedy_decode(m, input, cfg).log_prob == a.log_prob);
}

TEST_CASE("greedy ties go to the lowest id") {
    auto m = random_model(3);
    for (auto& v : m.params.output_weight.values()) v = 0.0;
    m.params.output_bias.fill(0.0);
    m.params.output_bias[15] = 5.0;
    m.params.output_bias[14] = 5.0;
    DecodeConfig cfg;
    cfg.max_len = 2;
    CHECK(greedy_decode(m, random_input(3), cfg).tokens == std::vector<corpus::TokenId>{14, 14});
}

TEST_CASE("log probability bookkeeping") {
    const auto m = random_model(4);
    const auto input = random_input(4);
    DecodeConfig cfg;
    const auto g = greedy_decode(m, input, cfg);
    CHECK(g.log_prob == doctest::Approx(sequence_log_prob(m, input, g.tokens, g.finished)).epsilon(1e-12));
    cfg.strategy = DecodeStrategy::beam;
    const auto b = beam_decode(m, input, cfg);
    CHECK(b.log_prob == doctest::Approx(sequence_log_prob(m, input, b.tokens, b.finished)).epsilon(1e-12));
}

TEST_CASE("beam width 1 equals greedy") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto m = random_model(seed);
        const auto input = random_input(seed);
        DecodeConfig cfg;
        const auto g = greedy_decode(m, input, cfg);
        cfg.strategy = DecodeStrategy::beam;
        cfg.beam_width = 1;
        const auto b = beam_decode(m, input, cfg);
        CHECK(b.tokens == g.tokens);
        CHECK(b.log_prob == g.log_prob);
    }
}

TEST_CASE("beam score is at least the greedy score") {
    std::size_t comparable = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto m = random_model(seed + 100);
        // A mild eos bias makes most hypotheses finish within max_len.
        m.params.output_bias[Vocabulary::kEos] = 4.0;
        const auto input = random_input(seed);
        DecodeConfig cfg;
        const auto g = greedy_decode(m, input, cfg);
        cfg.strategy = DecodeStrategy::beam;
        cfg.beam_width = 4;
        const auto b = beam_decode(m, input, cfg);
        if (!g.finished || !b.finished) continue;
        ++comparable;
        CHECK(b.log_prob >= g.log_prob - 1e-12);
    }
    CHECK(comparable >= 15);
}

TEST_CASE("decode config validation and dispatch") {
    DecodeConfig cfg;
    cfg.beam_width = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(parse_decode_strategy("sample"), ConfigError);
    CHECK(parse_decode_strategy("beam") == DecodeStrategy::beam);
    const auto m = random_model(5);
    const auto input = random_input(5);
    DecodeConfig greedy;
    CHECK(decode(m, input, greedy).tokens == greedy_decode(m, input, greedy).tokens);
}

TEST_CASE("postprocess") {
    const auto vocab = corpus::build_vocabulary(
        {{"a", "TOOLS", 3, "x", "thanks for your review"}, {"a", "TOOLS", 3, "x", "contact"}}, 1);
    const auto ids = vocab.encode({"thanks", "for", "your", "review"});
    CHECK(postprocess(ids, vocab) == "thanks for your review");
    CHECK(postprocess({vocab.id("contact"), vocab.id("⟨email⟩")}, vocab) == "contact ⟨email⟩");
    CHECK(postprocess({Vocabulary::kSos, vocab.id("thanks"), Vocabulary::kEos}, vocab) == "thanks");
    const std::string original = "thanks   for your\treview";
    CHECK(postprocess(vocab.encode(corpus::tokenize(original)), vocab) == "thanks for your review");
}
