#include "trrgen/generation/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trrgen/error.hpp"
#include "trrgen/model/transformer.hpp"

namespace trrgen::gen {

namespace {

using corpus::Vocabulary;

// Encodes the review once and answers next-token queries for any prefix.
class DecoderSession {
public:
    DecoderSession(const model::Model& model, const corpus::EncodedRecord& input)
        : model_(model), tape_(false), vars_(model::bind_parameters(tape_, model.params, false)) {
        memory_ = model::encode_review(vars_, input.src, input.rating, input.category, model.config, {});
    }

    // Log-probabilities over the vocabulary for the token after `prefix`
    // (which starts with ⟨sos⟩).
    std::vector<double> next_log_probs(const std::vector<TokenId>& prefix) {
        const num::Var logits = model::decoder_forward(prefix, memory_, vars_, model_.config, {});
        const num::Tensor& lv = logits.value();
        const num::Tensor lp = num::log_softmax_row(lv.row_span(lv.rows() - 1));
        return {lp.values().begin(), lp.values().end()};
    }

private:
    const model::Model& model_;
    num::Tape tape_;
    model::ParameterVars vars_;
    model::EncoderOutput memory_;
};

std::size_t step_limit(const model::Model& model, const DecodeConfig& config) {
    const std::size_t cap = model.config.max_tgt_len;
    return config.max_len == 0 ? cap : std::min(config.max_len, cap);
}

TokenId argmax_lowest(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return static_cast<TokenId>(best);
}

}  // namespace

DecodeStrategy parse_decode_strategy(std::string_view name) {
    if (name == "greedy") return DecodeStrategy::greedy;
    if (name == "beam") return DecodeStrategy::beam;
    throw ConfigError("unknown decoding strategy '" + std::string(name) + "' (expected greedy or beam)");
}

std::string_view to_string(DecodeStrategy strategy) {
    return strategy == DecodeStrategy::greedy ? "greedy" : "beam";
}

void DecodeConfig::validate() const {
    if (beam_width < 1) throw ConfigError("beam_width must be at least 1");
    if (length_penalty < 0.0) throw ConfigError("length_penalty must be non-negative");
}

Hypothesis greedy_decode(const model::Model& model, const corpus::EncodedRecord& input, const DecodeConfig& config) {
    config.validate();
    DecoderSession session(model, input);
    std::vector<TokenId> prefix{Vocabulary::kSos};
    Hypothesis out;
    const std::size_t limit = step_limit(model, config);
    for (std::size_t step = 0; step < limit; ++step) {
        const auto logp = session.next_log_probs(prefix);
        const TokenId next = argmax_lowest(logp);
        out.log_prob += logp[static_cast<std::size_t>(next)];
        if (next == Vocabulary::kEos) {
            out.finished = true;
            break;
        }
        out.tokens.push_back(next);
        prefix.push_back(next);
    }
    return out;
}

Hypothesis beam_decode(const model::Model& model, const corpus::EncodedRecord& input, const DecodeConfig& config) {
    config.validate();
    DecoderSession session(model, input);
    const std::size_t width = config.beam_width;
    const std::size_t limit = step_limit(model, config);

    struct Beam {
        std::vector<TokenId> prefix;  // starts with ⟨sos⟩
        double score;
    };
    struct Candidate {
        double score;
        double step_log_prob;
        std::size_t beam;
        TokenId token;
    };
    // Higher score first; then the more likely step, older beam, lower id.
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.step_log_prob != b.step_log_prob) return a.step_log_prob > b.step_log_prob;
        if (a.beam != b.beam) return a.beam < b.beam;
        return a.token < b.token;
    };

    std::vector<Beam> alive{{{Vocabulary::kSos}, 0.0}};
    std::vector<Hypothesis> finished;
    for (std::size_t step = 0; step < limit && !alive.empty(); ++step) {
        std::vector<Candidate> candidates;
        for (std::size_t b = 0; b < alive.size(); ++b) {
            const auto logp = session.next_log_probs(alive[b].prefix);
            for (std::size_t t = 0; t < logp.size(); ++t)
                candidates.push_back({alive[b].score + logp[t], logp[t], b, static_cast<TokenId>(t)});
        }
        const std::size_t keep = std::min(width, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                          better);
        std::vector<Beam> next;
        for (std::size_t i = 0; i < keep; ++i) {
            const Candidate& c = candidates[i];
            const Beam& parent = alive[c.beam];
            if (c.token == Vocabulary::kEos) {
                finished.push_back({{parent.prefix.begin() + 1, parent.prefix.end()}, c.score, true});
            } else {
                Beam extended = parent;
                extended.prefix.push_back(c.token);
                extended.score = c.score;
                next.push_back(std::move(extended));
            }
        }
        alive = std::move(next);
        // Scores only fall as hypotheses grow, so without length normalisation
        // no survivor can overtake the best retired hypothesis.
        if (config.length_penalty == 0.0 && !finished.empty() && !alive.empty()) {
            double best_finished = -std::numeric_limits<double>::infinity();
            for (const auto& h : finished) best_finished = std::max(best_finished, h.log_prob);
            if (best_finished >= alive.front().score) {
                alive.clear();
                break;
            }
        }
    }
    for (const auto& b : alive) finished.push_back({{b.prefix.begin() + 1, b.prefix.end()}, b.score, false});

    auto ranked = [&](const Hypothesis& h) {
        if (config.length_penalty == 0.0) return h.log_prob;
        const double length = static_cast<double>(h.tokens.size() + (h.finished ? 1 : 0));
        return h.log_prob / std::pow(std::max(length, 1.0), config.length_penalty);
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < finished.size(); ++i)
        if (ranked(finished[i]) > ranked(finished[best])) best = i;
    return finished.at(best);
}

Hypothesis decode(const model::Model& model, const corpus::EncodedRecord& input, const DecodeConfig& config) {
    return config.strategy == DecodeStrategy::greedy ? greedy_decode(model, input, config)
                                                     : beam_decode(model, input, config);
}

double sequence_log_prob(const model::Model& model, const corpus::EncodedRecord& input,
                         const std::vector<TokenId>& tokens, bool closed) {
    DecoderSession session(model, input);
    std::vector<TokenId> prefix{Vocabulary::kSos};
    double total = 0.0;
    for (TokenId t : tokens) {
        total += session.next_log_probs(prefix)[static_cast<std::size_t>(t)];
        prefix.push_back(t);
    }
    if (closed) total += session.next_log_probs(prefix)[static_cast<std::size_t>(Vocabulary::kEos)];
    return total;
}

std::string postprocess(const std::vector<TokenId>& ids, const corpus::Vocabulary& vocab) {
    std::string out;
    for (TokenId id : ids) {
        if (id == Vocabulary::kSos || id == Vocabulary::kEos || id == Vocabulary::kPad) continue;
        if (!out.empty()) out += ' ';
        out += vocab.token(id);
    }
    return out;
}

}  // namespace trrgen::gen
