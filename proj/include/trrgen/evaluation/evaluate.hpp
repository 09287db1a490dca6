#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trrgen/corpus/encode.hpp"
#include "trrgen/corpus/record.hpp"
#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/evaluation/bleu.hpp"
#include "trrgen/generation/decode.hpp"
#include "trrgen/model/parameters.hpp"

namespace trrgen::eval {

struct EvaluationResult {
    BleuReport report;
    std::vector<std::string> candidates;  // postprocessed responses, test order
};

// Decodes every test review and scores the responses against the
// ground-truth replies with corpus BLEU-4, using the training tokenizer on
// both sides. Throws ValidationError on an empty test set, a category the
// vocabulary lacks, or a vocabulary size that differs from the model's.
// `threads` = 0 uses the hardware concurrency.
EvaluationResult evaluate_model(const model::Model& model, const corpus::Vocabulary& vocab,
                                const std::vector<corpus::ReviewRecord>& test, const gen::DecodeConfig& decode,
                                const corpus::EncodeLimits& limits, unsigned threads = 0);

// Scores pre-made candidate texts against the records' responses.
BleuReport score_texts(const std::vector<std::string>& candidates, const std::vector<corpus::ReviewRecord>& test);

// One JSON object per report; `label` names the row (variant or baseline).
nlohmann::ordered_json report_json(const std::string& label, const BleuReport& report, const std::string& digest);

struct ReportRow {
    std::string label;
    BleuReport report;
};

// Aligned text table: label, BLEU-4, p1..p4, BP.
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace trrgen::eval
