// trrgen: preprocess, build-vocab, train, generate, evaluate and ablate from
// the command line. Machine outputs are JSON-Lines on stdout; tables and
// progress go to stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trrgen/app/checkpoint.hpp"
#include "trrgen/app/pipeline.hpp"
#include "trrgen/app/run_config.hpp"
#include "trrgen/app/training.hpp"
#include "trrgen/corpus/ads.hpp"
#include "trrgen/corpus/record.hpp"
#include "trrgen/corpus/text.hpp"
#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/error.hpp"
#include "trrgen/evaluation/evaluate.hpp"

namespace {

using namespace trrgen;

// Holds --<key> overrides for one subcommand. Precedence when resolving:
// command-line flag > TRRGEN_SEED > config file > defaults.
class ConfigFlags {
public:
    ConfigFlags(CLI::App& cmd, const std::vector<std::string>& keys) {
        cmd.add_option("--config", config_path_, "flat key = value config file");
        for (const auto& key : keys) {
            auto& slot = values_[key];
            options_[key] = cmd.add_option("--" + key, slot, "override config key '" + key + "'");
        }
    }

    app::RunConfig resolve() const {
        app::RunConfig config;
        if (!config_path_.empty()) app::apply_config_file(config, config_path_);
        app::apply_environment(config);
        for (const auto& [key, opt] : options_)
            if (opt->count() > 0) app::set_value(config, key, values_.at(key));
        config.validate();
        return config;
    }

    // Applies explicit flags only; used where the base config comes from a
    // checkpoint.
    void overlay(app::RunConfig& config) const {
        for (const auto& [key, opt] : options_)
            if (opt->count() > 0) app::set_value(config, key, values_.at(key));
    }

private:
    std::string config_path_;
    std::map<std::string, std::string> values_;
    std::map<std::string, CLI::Option*> options_;
};

const std::vector<std::string> kDecodeKeys = {"strategy", "beam_width", "decode_max_len", "length_penalty"};

const std::vector<std::string> kPreprocessKeys = {
    "lowercase",         "replace_app_name",  "email_pattern",       "url_pattern", "user_id_pattern",
    "app_name_pattern",  "ad_ngram_n",        "ad_flag_threshold",   "filter_ads",  "blocklist",
    "max_review_tokens", "max_response_tokens"};

corpus::CorpusFormat format_of(const std::string& explicit_format, const std::string& path) {
    return explicit_format.empty() ? corpus::format_for_path(path) : corpus::parse_corpus_format(explicit_format);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

corpus::ReviewRecord record_from_json(const nlohmann::json& j) {
    corpus::ReviewRecord r;
    try {
        r.review_text = j.at("review").get<std::string>();
        r.rating = j.at("rating").get<int>();
        r.category = j.at("category").get<std::string>();
        if (j.contains("app_name")) r.app_name = j.at("app_name").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generate input needs review, rating and category: ") + e.what());
    }
    return r;
}

std::vector<model::FusionVariant> parse_variants(const std::vector<std::string>& names) {
    std::vector<model::FusionVariant> out;
    for (const auto& n : names) out.push_back(model::parse_fusion_variant(n));
    return out;
}

int run(int argc, char** argv) {
    CLI::App cli{"Feature-conditioned Transformer for app review responses"};
    cli.require_subcommand(1);
    cli.set_help_all_flag("--help-all", "Expand all help");

    // preprocess
    auto* pre = cli.add_subcommand("preprocess", "Normalize a corpus (placeholders, casing, optional ad filtering)");
    std::string pre_in, pre_out, pre_format;
    pre->add_option("--in", pre_in, "input corpus (.jsonl or .tsv)")->required();
    pre->add_option("--out", pre_out, "output corpus")->required();
    pre->add_option("--corpus-format", pre_format, "jsonl or tsv (default: by extension)");
    ConfigFlags pre_flags(*pre, kPreprocessKeys);

    // report-ads
    auto* ads = cli.add_subcommand("report-ads", "Count mid-sentence n-grams of responses as TSV");
    std::string ads_in, ads_format;
    bool ads_flagged = false;
    ads->add_option("--in", ads_in, "preprocessed corpus")->required();
    ads->add_option("--corpus-format", ads_format, "jsonl or tsv (default: by extension)");
    ads->add_flag("--flagged-only", ads_flagged, "only expressions at or above ad_flag_threshold");
    ConfigFlags ads_flags(*ads, {"ad_ngram_n", "ad_flag_threshold"});

    // build-vocab
    auto* voc = cli.add_subcommand("build-vocab", "Build the shared vocabulary file");
    std::string voc_in, voc_out, voc_format;
    voc->add_option("--in", voc_in, "preprocessed corpus")->required();
    voc->add_option("--out", voc_out, "vocabulary file")->required();
    voc->add_option("--corpus-format", voc_format, "jsonl or tsv (default: by extension)");
    ConfigFlags voc_flags(*voc, {"min_freq"});

    // train
    auto* train = cli.add_subcommand("train", "Train a model and write a checkpoint");
    std::string train_out, train_log;
    train->add_option("--out", train_out, "checkpoint path")->required();
    train->add_option("--log", train_log, "JSON-Lines training log (default: stdout)");
    ConfigFlags train_flags(*train, app::run_config_keys());

    // generate
    auto* gen_cmd = cli.add_subcommand("generate", "Generate a response for one review or a JSON-Lines batch");
    std::string gen_ckpt, gen_review, gen_category, gen_app, gen_batch, gen_out;
    int gen_rating = 0;
    gen_cmd->add_option("--checkpoint", gen_ckpt, "checkpoint path")->required();
    auto* review_opt = gen_cmd->add_option("--review", gen_review, "review text");
    gen_cmd->add_option("--rating", gen_rating, "star rating 1-5");
    gen_cmd->add_option("--category", gen_category, "app category");
    gen_cmd->add_option("--app-name", gen_app, "app name (replaced by a placeholder)");
    auto* batch_opt =
        gen_cmd->add_option("--batch", gen_batch, "JSON-Lines input with review, rating, category[, app_name]");
    gen_cmd->add_option("--out", gen_out, "batch output (default: stdout)");
    review_opt->excludes(batch_opt);
    ConfigFlags gen_flags(*gen_cmd, kDecodeKeys);

    // evaluate
    auto* ev = cli.add_subcommand("evaluate", "Corpus BLEU-4 of a checkpoint on a test file");
    std::string ev_ckpt, ev_test, ev_format, ev_candidates;
    unsigned ev_threads = 0;
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint path")->required();
    ev->add_option("--test", ev_test, "preprocessed test corpus")->required();
    ev->add_option("--corpus-format", ev_format, "jsonl or tsv (default: by extension)");
    ev->add_option("--threads", ev_threads, "decoding threads (0 = all cores)");
    ev->add_option("--candidates", ev_candidates, "write generated responses here, one per line");
    ConfigFlags ev_flags(*ev, kDecodeKeys);

    // ablate
    auto* abl = cli.add_subcommand("ablate", "Train and evaluate several fusion variants on one split");
    std::vector<std::string> abl_variants{"vanilla", "category_only", "rating_only", "trrgen_concat"};
    std::string abl_log, abl_out;
    bool abl_random = false;
    abl->add_option("--variants", abl_variants, "fusion variants")->delimiter(',');
    abl->add_flag("--random-baseline", abl_random, "add a random-selection row");
    abl->add_option("--log", abl_log, "JSON-Lines training log for every variant");
    abl->add_option("--out", abl_out, "JSON-Lines report (default: stdout)");
    ConfigFlags abl_flags(*abl, app::run_config_keys());

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "trrgen: error[usage]: %s\n", e.what());
        return 2;
    }

    if (*pre) {
        const auto config = pre_flags.resolve();
        const auto format = format_of(pre_format, pre_in);
        const auto records = app::preprocess_records(corpus::load_corpus(pre_in, format), config);
        corpus::save_corpus(pre_out, records, format_of(pre_format, pre_out));
        std::cerr << "preprocessed " << records.size() << " records\n";
    } else if (*ads) {
        const auto config = ads_flags.resolve();
        const auto records = corpus::load_corpus(ads_in, format_of(ads_format, ads_in));
        std::cout << corpus::format_ad_report(corpus::ad_report(records, config.preprocess_config()), ads_flagged);
    } else if (*voc) {
        const auto config = voc_flags.resolve();
        const auto records = corpus::load_corpus(voc_in, format_of(voc_format, voc_in));
        const auto vocab = corpus::build_vocabulary(records, config.min_freq);
        corpus::save_vocabulary(voc_out, vocab);
        std::cerr << "vocabulary of " << vocab.size() << " tokens\n";
    } else if (*train) {
        const auto config = train_flags.resolve();
        const auto dataset = app::load_dataset(config);
        const auto vocab = app::resolve_vocabulary(config, dataset.train);
        std::ofstream log_file;
        if (!train_log.empty()) log_file = open_output(train_log);
        std::ostream& log = train_log.empty() ? std::cout : log_file;
        const auto ck = app::train_checkpoint(config, vocab, dataset, [&](const app::EpochLog& e) {
            log << app::epoch_log_json(e).dump() << '\n' << std::flush;
        });
        app::save_checkpoint(train_out, ck);
        std::cerr << "saved " << train_out << " (epoch " << ck.meta.epoch << ")\n";
    } else if (*gen_cmd) {
        const auto ck = app::load_checkpoint(gen_ckpt);
        auto config = ck.config;
        gen_flags.overlay(config);
        config.decode.validate();
        if (!gen_batch.empty()) {
            std::ifstream in(gen_batch, std::ios::binary);
            if (!in) throw IoError("cannot open " + gen_batch);
            std::ofstream out_file;
            if (!gen_out.empty()) out_file = open_output(gen_out);
            std::ostream& out = gen_out.empty() ? std::cout : out_file;
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                nlohmann::ordered_json input;
                try {
                    input = nlohmann::ordered_json::parse(line);
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
                }
                nlohmann::ordered_json row;
                try {
                    row["response"] = app::generate_response(ck, record_from_json(input), config.decode);
                } catch (const Error& e) {
                    throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
                }
                nlohmann::ordered_json result;
                result["input"] = input;
                result["response"] = row["response"];
                out << result.dump() << '\n';
            }
        } else {
            if (review_opt->count() == 0 || gen_category.empty())
                throw ConfigError("generate needs --review, --rating and --category (or --batch)");
            corpus::ReviewRecord r;
            r.review_text = gen_review;
            r.rating = gen_rating;
            r.category = gen_category;
            r.app_name = gen_app;
            std::cout << app::generate_response(ck, r, config.decode) << '\n';
        }
    } else if (*ev) {
        const auto ck = app::load_checkpoint(ev_ckpt);
        auto config = ck.config;
        ev_flags.overlay(config);
        config.decode.validate();
        const auto test = corpus::load_corpus(ev_test, format_of(ev_format, ev_test));
        const auto result =
            eval::evaluate_model(ck.model(), ck.vocab, test, config.decode, config.encode_limits(), ev_threads);
        if (!ev_candidates.empty()) {
            auto out = open_output(ev_candidates);
            for (const auto& c : result.candidates) out << c << '\n';
        }
        const std::string label(model::to_string(config.model.fusion_variant));
        std::cout << eval::report_json(label, result.report, app::config_digest(config)).dump() << '\n';
        std::cerr << eval::format_report_table({{label, result.report}});
    } else if (*abl) {
        const auto config = abl_flags.resolve();
        const auto variants = parse_variants(abl_variants);
        const auto dataset = app::load_dataset(config);
        const auto vocab = app::resolve_vocabulary(config, dataset.train);
        std::ofstream log_file;
        if (!abl_log.empty()) log_file = open_output(abl_log);
        const auto rows = app::run_ablation(config, vocab, dataset, variants, abl_random,
                                            [&](model::FusionVariant v, const app::EpochLog& e) {
                                                if (abl_log.empty()) return;
                                                auto j = app::epoch_log_json(e);
                                                j["variant"] = model::to_string(v);
                                                log_file << j.dump() << '\n' << std::flush;
                                            });
        std::ofstream out_file;
        if (!abl_out.empty()) out_file = open_output(abl_out);
        std::ostream& out = abl_out.empty() ? std::cout : out_file;
        std::vector<eval::ReportRow> table;
        for (const auto& row : rows) {
            auto run_config = config;
            if (row.label != app::kRandomBaselineLabel)
                run_config.model.fusion_variant = model::parse_fusion_variant(row.label);
            out << eval::report_json(row.label, row.report, app::config_digest(run_config)).dump() << '\n';
            table.push_back({row.label, row.report});
        }
        std::cerr << eval::format_report_table(table);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const trrgen::Error& e) {
        std::fprintf(stderr, "trrgen: error[%s]: %s\n", e.kind().c_str(), e.what());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "trrgen: error[internal]: %s\n", e.what());
    }
    return 1;
}
