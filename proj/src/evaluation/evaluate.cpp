#include "trrgen/evaluation/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <thread>

#include "trrgen/corpus/text.hpp"
#include "trrgen/error.hpp"

namespace trrgen::eval {

namespace {

std::vector<Tokens> reference_tokens(const std::vector<corpus::ReviewRecord>& test) {
    std::vector<Tokens> refs;
    refs.reserve(test.size());
    for (const auto& r : test) refs.push_back(corpus::tokenize(r.response_text));
    return refs;
}

}  // namespace

EvaluationResult evaluate_model(const model::Model& model, const corpus::Vocabulary& vocab,
                                const std::vector<corpus::ReviewRecord>& test, const gen::DecodeConfig& decode,
                                const corpus::EncodeLimits& limits, unsigned threads) {
    if (test.empty()) throw ValidationError("evaluation needs at least one test record");
    if (model.config.vocab_size != vocab.size())
        throw ValidationError("vocabulary mismatch: model has " + std::to_string(model.config.vocab_size) +
                              " tokens, vocabulary has " + std::to_string(vocab.size()));
    for (const auto& r : test)
        if (!vocab.has_category(r.category))
            throw ValidationError("vocabulary mismatch: category '" + r.category + "' is unknown to the checkpoint");
    const auto encoded = corpus::encode_corpus(test, vocab, limits);

    EvaluationResult result;
    result.candidates.resize(test.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, test.size()));

    // Each worker handles a strided subset; outputs land in fixed slots, so the
    // result does not depend on the thread count.
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned worker) {
        try {
            for (std::size_t i = worker; i < encoded.size(); i += threads)
                result.candidates[i] = gen::postprocess(gen::decode(model, encoded[i], decode).tokens, vocab);
        } catch (...) {
            errors[worker] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    result.report = score_texts(result.candidates, test);
    return result;
}

BleuReport score_texts(const std::vector<std::string>& candidates, const std::vector<corpus::ReviewRecord>& test) {
    std::vector<Tokens> cands;
    cands.reserve(candidates.size());
    for (const auto& c : candidates) cands.push_back(corpus::tokenize(c));
    return corpus_bleu(cands, reference_tokens(test));
}

nlohmann::ordered_json report_json(const std::string& label, const BleuReport& report, const std::string& digest) {
    nlohmann::ordered_json j;
    j["variant"] = label;
    j["bleu4"] = report.bleu;
    j["p1"] = report.precisions[0];
    j["p2"] = report.precisions[1];
    j["p3"] = report.precisions[2];
    j["p4"] = report.precisions[3];
    j["bp"] = report.brevity_penalty;
    j["candidate_length"] = report.counts.candidate_length;
    j["reference_length"] = report.counts.reference_length;
    j["precision_level"] = "corpus";
    j["config_digest"] = digest;
    return j;
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
    std::size_t width = 7;
    for (const auto& r : rows) width = std::max(width, r.label.size());
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-*s %8s %7s %7s %7s %7s %7s\n", static_cast<int>(width), "variant", "BLEU-4",
                  "p1", "p2", "p3", "p4", "BP");
    out += line;
    for (const auto& r : rows) {
        const auto& p = r.report.precisions;
        std::snprintf(line, sizeof line, "%-*s %8.2f %7.4f %7.4f %7.4f %7.4f %7.4f\n", static_cast<int>(width),
                      r.label.c_str(), r.report.bleu, p[0], p[1], p[2], p[3], r.report.brevity_penalty);
        out += line;
    }
    return out;
}

}  // namespace trrgen::eval
