#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trrgen/app/run_config.hpp"
#include "trrgen/app/training.hpp"
#include "trrgen/corpus/record.hpp"
#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/evaluation/evaluate.hpp"
#include "trrgen/model/config.hpp"

namespace trrgen::app {

// Normalizes every record and, with filter_ads on, drops blocklisted ad
// sentences (blocklist file required).
std::vector<corpus::ReviewRecord> preprocess_records(const std::vector<corpus::ReviewRecord>& records,
                                                     const RunConfig& config);

struct Dataset {
    std::vector<corpus::ReviewRecord> train;
    std::vector<corpus::ReviewRecord> valid;
    std::vector<corpus::ReviewRecord> test;
};

// Explicit train/valid/test files when `train` is set, otherwise a seeded
// split of `data`. Records are expected to be preprocessed already.
Dataset load_dataset(const RunConfig& config);

// The `vocab` file when set, otherwise built from the training records.
corpus::Vocabulary resolve_vocabulary(const RunConfig& config, const std::vector<corpus::ReviewRecord>& train);

// Trains on dataset.train, validating on dataset.valid.
Checkpoint train_checkpoint(const RunConfig& config, const corpus::Vocabulary& vocab, const Dataset& dataset,
                            const LogSink& sink = {});

// Normalizes a raw review (with its app name) and decodes a response.
std::string generate_response(const Checkpoint& checkpoint, const corpus::ReviewRecord& input,
                              const gen::DecodeConfig& decode);

struct AblationRow {
    std::string label;
    eval::BleuReport report;
    std::size_t epochs_run = 0;  // 0 for the random baseline
};

using AblationLogSink = std::function<void(model::FusionVariant, const EpochLog&)>;

// Trains and evaluates each variant from the same seed, vocabulary and split,
// so rows differ only in fusion_variant. The optional baseline row samples
// training responses at random.
std::vector<AblationRow> run_ablation(const RunConfig& config, const corpus::Vocabulary& vocab,
                                      const Dataset& dataset, const std::vector<model::FusionVariant>& variants,
                                      bool random_baseline, const AblationLogSink& sink = {});

inline constexpr std::string_view kRandomBaselineLabel = "random_selection";

}  // namespace trrgen::app
