#include "trrgen/app/pipeline.hpp"

#include "trrgen/corpus/ads.hpp"
#include "trrgen/corpus/encode.hpp"
#include "trrgen/corpus/text.hpp"
#include "trrgen/error.hpp"

namespace trrgen::app {

std::vector<corpus::ReviewRecord> preprocess_records(const std::vector<corpus::ReviewRecord>& records,
                                                     const RunConfig& config) {
    const auto pre = config.preprocess_config();
    pre.validate();
    const corpus::Normalizer normalizer(pre);
    std::vector<corpus::ReviewRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(corpus::normalize_record(r, normalizer));
    if (config.filter_ads) {
        if (config.blocklist.empty()) throw ConfigError("filter_ads requires a blocklist file");
        out = corpus::filter_ads(out, corpus::load_blocklist(config.blocklist));
    }
    return out;
}

Dataset load_dataset(const RunConfig& config) {
    const auto format = corpus::parse_corpus_format(config.format);
    Dataset ds;
    if (!config.train.empty()) {
        ds.train = corpus::load_corpus(config.train, format);
        if (!config.valid.empty()) ds.valid = corpus::load_corpus(config.valid, format);
        if (!config.test.empty()) ds.test = corpus::load_corpus(config.test, format);
    } else if (!config.data.empty()) {
        auto split = corpus::split_corpus(corpus::load_corpus(config.data, format), config.seed, config.split);
        ds.train = std::move(split.train);
        ds.valid = std::move(split.valid);
        ds.test = std::move(split.test);
    } else {
        throw ConfigError("no data: set --data or --train");
    }
    if (ds.train.empty()) throw ValidationError("training set is empty");
    return ds;
}

corpus::Vocabulary resolve_vocabulary(const RunConfig& config, const std::vector<corpus::ReviewRecord>& train) {
    if (!config.vocab.empty()) return corpus::load_vocabulary(config.vocab);
    return corpus::build_vocabulary(train, config.min_freq);
}

Checkpoint train_checkpoint(const RunConfig& config, const corpus::Vocabulary& vocab, const Dataset& dataset,
                            const LogSink& sink) {
    const auto limits = config.encode_limits();
    const auto train = corpus::encode_corpus(dataset.train, vocab, limits);
    const auto valid = corpus::encode_corpus(dataset.valid, vocab, limits);
    auto result = train_model(config, vocab.size(), train, valid, sink);
    return {config, vocab, std::move(result.params), result.meta};
}

std::string generate_response(const Checkpoint& checkpoint, const corpus::ReviewRecord& input,
                              const gen::DecodeConfig& decode) {
    const corpus::Normalizer normalizer(checkpoint.config.preprocess_config());
    auto record = corpus::normalize_record(input, normalizer);
    record.response_text.clear();
    const auto encoded = corpus::encode_record(record, checkpoint.vocab, checkpoint.config.encode_limits());
    const auto model = checkpoint.model();
    return gen::postprocess(gen::decode(model, encoded, decode).tokens, checkpoint.vocab);
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const corpus::Vocabulary& vocab,
                                      const Dataset& dataset, const std::vector<model::FusionVariant>& variants,
                                      bool random_baseline, const AblationLogSink& sink) {
    if (variants.empty() && !random_baseline) throw ConfigError("ablation needs at least one variant");
    if (dataset.test.empty()) throw ValidationError("ablation needs a non-empty test set");
    const auto limits = config.encode_limits();
    const auto train = corpus::encode_corpus(dataset.train, vocab, limits);
    const auto valid = corpus::encode_corpus(dataset.valid, vocab, limits);

    std::vector<AblationRow> rows;
    for (const auto variant : variants) {
        RunConfig run = config;
        run.model.fusion_variant = variant;
        LogSink log;
        if (sink) log = [&](const EpochLog& e) { sink(variant, e); };
        auto trained = train_model(run, vocab.size(), train, valid, log);
        const model::Model model{run.model_config(vocab.size()), std::move(trained.params)};
        auto evaluation = eval::evaluate_model(model, vocab, dataset.test, run.decode, limits);
        rows.push_back({std::string(model::to_string(variant)), evaluation.report, trained.epochs_run});
    }
    if (random_baseline) {
        std::vector<std::string> pool;
        pool.reserve(dataset.train.size());
        for (const auto& r : dataset.train) pool.push_back(r.response_text);
        const auto picks = eval::random_selection_baseline(pool, dataset.test.size(), config.seed);
        rows.push_back({std::string(kRandomBaselineLabel), eval::score_texts(picks, dataset.test), 0});
    }
    return rows;
}

}  // namespace trrgen::app
