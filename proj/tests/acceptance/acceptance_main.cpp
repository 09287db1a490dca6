// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed here; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles/bleu_oracle.hpp"
#include "oracles/positional_oracle.hpp"
#include "synthetic.hpp"
#include "trrgen/app/checkpoint.hpp"
#include "trrgen/app/pipeline.hpp"
#include "trrgen/app/training.hpp"
#include "trrgen/corpus/ads.hpp"
#include "trrgen/corpus/text.hpp"
#include "trrgen/evaluation/bleu.hpp"
#include "trrgen/evaluation/evaluate.hpp"
#include "trrgen/generation/decode.hpp"
#include "trrgen/model/transformer.hpp"
#include "trrgen/numerics/ops.hpp"

using namespace trrgen;
using model::FusionVariant;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradControlFloor = 1e-2;
constexpr double kGradSeconds = 60.0;
constexpr double kPositionalTolerance = 1e-12;
constexpr double kOverfitBleu = 95.0;
constexpr double kOverfitSeconds = 600.0;
constexpr std::size_t kOverfitMaxEpochs = 500;
constexpr double kAwareBleu = 90.0;
constexpr double kVanillaCeiling = 50.0;
constexpr double kRandomCeiling = 40.0;
constexpr double kCategorySeconds = 1200.0;
constexpr double kBleuOracleTolerance = 1e-9;
constexpr double kBpTolerance = 1e-12;
constexpr double kSoftmaxTolerance = 1e-6;
constexpr double kLayerNormMeanTolerance = 1e-6;
constexpr double kLayerNormVarTolerance = 1e-3;
constexpr double kMaskedWeightCeiling = 1e-9;

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// 1
Outcome gradient_correctness() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
        worst = std::max(worst, testing::full_model_grad_check(seed, FusionVariant::trrgen_concat).max_relative_error);
    const double elapsed = seconds_since(t0) / 3.0;
    double control = 1e300;
    for (const char* op : {"layer_norm", "softmax", "matmul"})
        control = std::min(control,
                           testing::full_model_grad_check(1, FusionVariant::trrgen_concat, op).max_relative_error);
    const bool pass = worst <= kGradTolerance && control > kGradControlFloor && elapsed <= kGradSeconds;
    return {pass, fmt("max rel err %.2e (<= %.0e) over 3 seeds, %.2f s per check; corrupted-rule controls >= %.2e "
                      "(> %.0e)",
                      worst, kGradTolerance, elapsed, control, kGradControlFloor)};
}

// 2
Outcome causality() {
    const auto cfg = testing::tiny_config(FusionVariant::trrgen_concat);
    const auto params = model::init_parameters(cfg, 21);
    std::mt19937_64 rng(21);
    std::size_t violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto rec = testing::random_records(rng, 1, cfg.vocab_size, 2, 8, 3, 12)[0];
        std::vector<corpus::TokenId> input(rec.tgt.begin(), rec.tgt.end() - 1);
        const std::size_t j = 1 + rng() % (input.size() - 1);
        auto perturbed = input;
        perturbed[j] = static_cast<corpus::TokenId>(13 + (input[j] - 13 + 1 + rng() % 6) % 7);
        num::Tape tape(false);
        const auto vars = model::bind_parameters(tape, params, false);
        const auto memory = model::encode_review(vars, rec.src, rec.rating, rec.category, cfg, {});
        const auto a = model::decoder_forward(input, memory, vars, cfg, {}).value();
        const auto b = model::decoder_forward(perturbed, memory, vars, cfg, {}).value();
        for (std::size_t t = 0; t < j; ++t)
            for (std::size_t c = 0; c < a.cols(); ++c)
                if (a.at(t, c) != b.at(t, c)) ++violations;
    }
    return {violations == 0, fmt("100 perturbations, %zu logits changed before the perturbed position", violations)};
}

// 3
Outcome positional() {
    double worst = 0.0;
    for (std::size_t d = 2; d <= 64; d += 2) {
        const auto pe = model::positional_encoding(64, d);
        for (std::size_t p = 0; p < 64; ++p)
            for (std::size_t i = 0; i < d; ++i)
                worst = std::max(worst, std::abs(pe.at(p, i) - oracle::positional_value(p, i, d)));
    }
    return {worst <= kPositionalTolerance, fmt("max |diff| %.2e (<= %.0e) over seq_len 64, d_model 2..64",
                                               worst, kPositionalTolerance)};
}

// 4
Outcome shape_ledger() {
    const FusionVariant variants[] = {FusionVariant::vanilla,       FusionVariant::rating_only,
                                      FusionVariant::category_only, FusionVariant::trrgen_concat,
                                      FusionVariant::trrgen_sum,    FusionVariant::trrgen_order};
    const std::size_t expected[] = {7, 7, 8, 8, 7, 9};
    const auto cfg = testing::tiny_config(FusionVariant::vanilla);
    const auto params = model::init_parameters(cfg, 1);
    const std::vector<corpus::TokenId> src = {13, 14, 15, 16, 17, 18, 19};
    std::string got;
    bool pass = true;
    for (std::size_t v = 0; v < 6; ++v) {
        num::Tape tape(false);
        auto c = cfg;
        c.fusion_variant = variants[v];
        const auto vars = model::bind_parameters(tape, params, false);
        const auto out = model::encode_review(vars, src, 6, 13, c, {}).states.rows();
        pass &= out == expected[v];
        got += (v ? "/" : "") + std::to_string(out);
    }
    return {pass, "encoder lengths " + got + " (expected 7/7/8/8/7/9)"};
}

// 5
Outcome feature_sensitivity() {
    const std::vector<corpus::TokenId> src = {13, 14, 15, 16, 17};
    std::string detail;
    bool pass = true;
    for (auto v : {FusionVariant::trrgen_concat, FusionVariant::trrgen_sum, FusionVariant::trrgen_order,
                   FusionVariant::vanilla, FusionVariant::category_only}) {
        auto cfg = testing::tiny_config(v);
        const auto params = model::init_parameters(cfg, 5);
        auto states = [&](corpus::TokenId rating) {
            num::Tape tape(false);
            const auto vars = model::bind_parameters(tape, params, false);
            return model::encode_review(vars, src, rating, 13, cfg, {}).states.value();
        };
        const auto a = states(4), b = states(8);
        double norm = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) norm += (a[i] - b[i]) * (a[i] - b[i]);
        norm = std::sqrt(norm);
        const bool ok = model::uses_rating(v) ? norm > 0.0 : a == b;
        pass &= ok;
        detail += fmt("%s%s %.2e", detail.empty() ? "" : ", ", std::string(model::to_string(v)).c_str(), norm);
    }
    return {pass, "rating-change diff norms: " + detail};
}

struct OverfitState {
    app::Checkpoint checkpoint;
    std::vector<corpus::ReviewRecord> train;
};

// 6
Outcome overfit(OverfitState& state) {
    const auto t0 = Clock::now();
    app::RunConfig cfg;
    cfg.model.d_model = 64;
    cfg.model.n_heads = 4;
    cfg.model.d_ff = 128;
    cfg.model.dropout = 0.0;
    cfg.model.max_src_len = 64;
    cfg.model.max_tgt_len = 64;
    cfg.preprocess.max_review_tokens = 60;
    cfg.preprocess.max_response_tokens = 64;
    cfg.optimizer.learning_rate = 3e-3;
    cfg.batch_size = 8;
    cfg.epochs = kOverfitMaxEpochs;
    cfg.min_train_loss = 0.01;
    cfg.min_freq = 1;
    cfg.seed = 1;
    app::Dataset data;
    data.train = corpus::load_corpus(testing::fixture_path("overfit32.jsonl"), corpus::CorpusFormat::jsonl);
    const auto vocab = corpus::build_vocabulary(data.train, cfg.min_freq);
    std::size_t epochs = 0;
    state.checkpoint = app::train_checkpoint(cfg, vocab, data, [&](const app::EpochLog& e) { epochs = e.epoch; });
    state.train = data.train;
    const auto result =
        eval::evaluate_model(state.checkpoint.model(), vocab, data.train, cfg.decode, cfg.encode_limits());
    const double elapsed = seconds_since(t0);
    const bool pass = result.report.bleu >= kOverfitBleu && epochs <= kOverfitMaxEpochs && elapsed <= kOverfitSeconds;
    return {pass, fmt("training-set BLEU-4 %.2f (>= %.0f) after %zu epochs, %.1f s (<= %.0f s)", result.report.bleu,
                      kOverfitBleu, epochs, elapsed, kOverfitSeconds)};
}

std::vector<app::AblationRow> synthetic_ablation(testing::SyntheticKey key, const std::vector<FusionVariant>& variants,
                                                 bool baseline) {
    const auto data = testing::synthetic_dataset(key, 400, 100, key == testing::SyntheticKey::category ? 11 : 13);
    const auto cfg = testing::synthetic_run_config();
    const auto vocab = corpus::build_vocabulary(data.train, cfg.min_freq);
    return app::run_ablation(cfg, vocab, data, variants, baseline);
}

std::string rows_detail(const std::vector<app::AblationRow>& rows) {
    std::string out;
    for (const auto& r : rows) out += fmt("%s%s %.2f", out.empty() ? "" : ", ", r.label.c_str(), r.report.bleu);
    return out;
}

// 7
Outcome category_ablation() {
    const auto t0 = Clock::now();
    const auto rows = synthetic_ablation(testing::SyntheticKey::category,
                                         {FusionVariant::vanilla, FusionVariant::category_only,
                                          FusionVariant::trrgen_concat, FusionVariant::trrgen_order},
                                         true);
    bool pass = true;
    for (const auto& r : rows) {
        if (r.label == "vanilla") pass &= r.report.bleu <= kVanillaCeiling;
        else if (r.label == app::kRandomBaselineLabel) pass &= r.report.bleu <= kRandomCeiling;
        else pass &= r.report.bleu >= kAwareBleu;
    }
    const double elapsed = seconds_since(t0);
    pass &= elapsed <= kCategorySeconds;
    return {pass, fmt("test BLEU-4 %s (aware >= %.0f, vanilla <= %.0f, random <= %.0f), %.1f s",
                      rows_detail(rows).c_str(), kAwareBleu, kVanillaCeiling, kRandomCeiling, elapsed)};
}

// 8
Outcome rating_experiment() {
    const auto rows = synthetic_ablation(testing::SyntheticKey::rating,
                                         {FusionVariant::vanilla, FusionVariant::rating_only,
                                          FusionVariant::trrgen_concat, FusionVariant::trrgen_sum,
                                          FusionVariant::trrgen_order},
                                         false);
    bool pass = true;
    for (const auto& r : rows) pass &= r.label == "vanilla" ? r.report.bleu <= kVanillaCeiling : r.report.bleu >= kAwareBleu;
    return {pass, fmt("test BLEU-4 %s (aware >= %.0f, vanilla <= %.0f)", rows_detail(rows).c_str(), kAwareBleu,
                      kVanillaCeiling)};
}

// 9
Outcome bleu_oracle() {
    std::mt19937_64 rng(909);
    std::size_t count_mismatches = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t pairs = 1 + rng() % 6, alphabet = 2 + rng() % 4;
        std::vector<eval::Tokens> cands(pairs), refs(pairs);
        for (auto* side : {&cands, &refs})
            for (auto& s : *side) {
                const auto len = rng() % 10;
                for (std::size_t i = 0; i < len; ++i) s.push_back(std::string(1, static_cast<char>('a' + rng() % alphabet)));
            }
        const auto expected = oracle::brute_counts(cands, refs);
        const auto got = eval::corpus_bleu(cands, refs);
        for (std::size_t n = 0; n < 4; ++n)
            count_mismatches += (got.counts.matches[n] != expected.matches[n]) + (got.counts.totals[n] != expected.totals[n]);
        count_mismatches += (got.counts.candidate_length != expected.c) + (got.counts.reference_length != expected.r);
        worst = std::max(worst, std::abs(got.bleu - oracle::brute_bleu(expected)));
    }
    const double bp_err = std::abs(eval::brevity_penalty(3, 4) - std::exp(-1.0 / 3.0));
    const bool bp_one = eval::brevity_penalty(4, 4) == 1.0 && eval::brevity_penalty(10, 8) == 1.0;
    const bool pass = count_mismatches == 0 && worst <= kBleuOracleTolerance && bp_err <= kBpTolerance && bp_one;
    return {pass, fmt("200 corpora: %zu count mismatches, max score diff %.2e (<= %.0e); |BP(3,4) - e^(-1/3)| = %.1e, "
                      "BP(c>=r) = 1: %s",
                      count_mismatches, worst, kBleuOracleTolerance, bp_err, bp_one ? "yes" : "no")};
}

// 10
Outcome numeric_invariants() {
    std::mt19937_64 rng(1010);
    std::normal_distribution<double> nd(0.0, 4.0);
    double sum_err = 0, shift_err = 0, mean_err = 0, var_err = 0, att_err = 0, masked_max = 0;
    for (int trial = 0; trial < 100; ++trial) {
        num::Tape tape(false);
        // Widths of 4+ keep row variances far above eps; near-constant rows are
        // pulled below unit variance by eps by design.
        const std::size_t r = 1 + rng() % 6, c = 4 + rng() % 60;
        num::Tensor x = num::Tensor::matrix(r, c), shifted = x;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = nd(rng);
        const double k = nd(rng) * 10;
        for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] + k;
        const auto s = num::softmax(tape.constant(x)).value();
        const auto s2 = num::softmax(tape.constant(shifted)).value();
        shift_err = std::max(shift_err, num::max_abs_diff(s, s2));
        for (std::size_t i = 0; i < r; ++i) {
            double total = 0;
            for (double v : s.row_span(i)) total += v;
            sum_err = std::max(sum_err, std::abs(total - 1.0));
        }

        const auto ln = num::layer_norm(tape.constant(x), tape.constant(num::Tensor::matrix(1, c, 1.0)),
                                        tape.constant(num::Tensor::matrix(1, c, 0.0)), 1e-5)
                            .value();
        for (std::size_t i = 0; i < r; ++i) {
            double mean = 0, var = 0;
            for (double v : ln.row_span(i)) mean += v;
            mean /= static_cast<double>(c);
            for (double v : ln.row_span(i)) var += (v - mean) * (v - mean);
            var /= static_cast<double>(c);
            mean_err = std::max(mean_err, std::abs(mean));
            var_err = std::max(var_err, std::abs(var - 1.0));
        }

        num::AttentionMask mask(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 1; j < c; ++j) mask.set(i, j, rng() % 3 != 0);
        const auto w = num::masked_softmax(tape.constant(x), mask).value();
        for (std::size_t i = 0; i < r; ++i) {
            double total = 0;
            for (std::size_t j = 0; j < c; ++j) {
                if (mask.allowed(i, j)) total += w.at(i, j);
                else masked_max = std::max(masked_max, w.at(i, j));
            }
            att_err = std::max(att_err, std::abs(total - 1.0));
        }
    }
    const bool pass = sum_err <= kSoftmaxTolerance && shift_err <= kSoftmaxTolerance &&
                      mean_err <= kLayerNormMeanTolerance && var_err <= kLayerNormVarTolerance &&
                      att_err <= kSoftmaxTolerance && masked_max <= kMaskedWeightCeiling;
    return {pass, fmt("softmax sum err %.1e, shift err %.1e; layer-norm mean %.1e, var err %.1e; attention sum err "
                      "%.1e, max masked weight %.1e",
                      sum_err, shift_err, mean_err, var_err, att_err, masked_max)};
}

// 11
Outcome preprocessing() {
    const auto input = corpus::load_corpus(testing::fixture_path("preprocess_input.jsonl"), corpus::CorpusFormat::jsonl);
    const auto expected = testing::read_file(testing::fixture_path("preprocess_expected.jsonl"));
    const corpus::PreprocessConfig cfg;
    const corpus::Normalizer norm(cfg);
    std::string produced;
    for (const auto& r : input) produced += corpus::format_record(corpus::normalize_record(r, norm), corpus::CorpusFormat::jsonl) + "\n";
    const bool golden = produced == expected;

    std::mt19937_64 rng(1111);
    const std::vector<std::string> pieces = {"Hi", "THERE", "a@b.io", "https://x.org/p", "www.q.com", "@someone",
                                             "!", ".", "Zen", "zenith", "  ", "it's", "⟨email⟩", "ÀB"};
    std::size_t idem_fail = 0;
    for (int i = 0; i < 100; ++i) {
        std::string s;
        for (std::size_t p = 0, n = 1 + rng() % 10; p < n; ++p) s += pieces[rng() % pieces.size()] + (rng() % 2 ? " " : "");
        const auto once = norm(s, "Zen");
        idem_fail += norm(once, "Zen") != once;
    }

    const auto ads = corpus::load_corpus(testing::fixture_path("ads.jsonl"), corpus::CorpusFormat::jsonl);
    std::size_t planted = 0;
    for (const auto& e : corpus::ad_report(ads, cfg).entries)
        if (corpus::join_tokens(e.expression) == "free phone cleaner which keeps") planted = e.count;

    const auto filtered = corpus::filter_ads(ads, corpus::parse_blocklist("free phone cleaner which keeps\n"));
    std::size_t untouched_changed = 0;
    for (std::size_t i = 0; i < ads.size(); ++i) {
        if (filtered[i].review_text != ads[i].review_text) ++untouched_changed;
        if (i % 4 != 0 && filtered[i].response_text != ads[i].response_text) ++untouched_changed;
    }
    const bool pass = golden && idem_fail == 0 && planted == 10 && untouched_changed == 0;
    return {pass, fmt("golden fixture %s; %zu/100 idempotence failures; planted 5-gram count %zu (expected 10); %zu "
                      "unblocked texts changed",
                      golden ? "byte-equal" : "DIFFERS", idem_fail, planted, untouched_changed)};
}

// 12
Outcome checkpoint_round_trip(const OverfitState& state) {
    const auto bytes = app::serialize_checkpoint(state.checkpoint);
    const auto loaded = app::deserialize_checkpoint(bytes);
    auto a = model::parameter_list(const_cast<model::Parameters&>(state.checkpoint.params));
    auto b = model::parameter_list(const_cast<model::Parameters&>(loaded.params));
    bool params_equal = a.size() == b.size();
    for (std::size_t i = 0; params_equal && i < a.size(); ++i) params_equal = *a[i] == *b[i];
    const bool bytes_equal = app::serialize_checkpoint(loaded) == bytes;

    std::size_t differing = 0;
    const auto before = state.checkpoint.model();
    const auto after = loaded.model();
    gen::DecodeConfig greedy, beam;
    beam.strategy = gen::DecodeStrategy::beam;
    const auto limits = state.checkpoint.config.encode_limits();
    for (const auto& r : state.train) {
        const auto e = corpus::encode_record(r, state.checkpoint.vocab, limits);
        differing += gen::decode(before, e, greedy).tokens != gen::decode(after, e, greedy).tokens;
        differing += gen::decode(before, e, beam).tokens != gen::decode(after, e, beam).tokens;
    }
    const bool pass = params_equal && bytes_equal && loaded.vocab == state.checkpoint.vocab && differing == 0;
    return {pass, fmt("parameters bitwise %s, re-save byte-identical %s, %zu/%zu generations differ",
                      params_equal ? "equal" : "DIFFER", bytes_equal ? "yes" : "NO", differing, 2 * state.train.size())};
}

// 13
Outcome beam_greedy() {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto cfg = testing::tiny_config(FusionVariant::trrgen_concat);
        cfg.max_tgt_len = 16;
        model::Model m{cfg, model::init_parameters(cfg, seed)};
        for (auto& v : m.params.output_weight.values()) v *= 6.0;
        std::mt19937_64 rng(seed * 7919);
        const auto input = testing::random_records(rng, 1, cfg.vocab_size)[0];
        gen::DecodeConfig g;
        gen::DecodeConfig b;
        b.strategy = gen::DecodeStrategy::beam;
        b.beam_width = 1;
        mismatches += gen::decode(m, input, g).tokens != gen::decode(m, input, b).tokens;
    }
    return {mismatches == 0, fmt("50 seeds, %zu token mismatches", mismatches)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
    };

    OverfitState overfit_state;
    report(1, "gradient correctness", gradient_correctness);
    report(2, "decoder causality", causality);
    report(3, "positional encoding", positional);
    report(4, "fusion shape ledger", shape_ledger);
    report(5, "feature sensitivity", feature_sensitivity);
    report(6, "overfit memorization", [&] { return overfit(overfit_state); });
    report(7, "synthetic category ablation", category_ablation);
    report(8, "synthetic rating experiment", rating_experiment);
    report(9, "BLEU oracle equivalence", bleu_oracle);
    report(10, "numeric invariants", numeric_invariants);
    report(11, "preprocessing", preprocessing);
    report(12, "checkpoint round trip", [&] { return checkpoint_round_trip(overfit_state); });
    report(13, "beam/greedy consistency", beam_greedy);
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
