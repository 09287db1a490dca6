#include "synthetic.hpp"

#include <fstream>
#include <sstream>

#include "trrgen/model/parameters.hpp"
#include "trrgen/model/transformer.hpp"

namespace trrgen::testing {

std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(TRRGEN_FIXTURE_DIR) / name;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

model::ModelConfig tiny_config(model::FusionVariant variant, std::size_t vocab_size) {
    model::ModelConfig cfg;
    cfg.d_model = 8;
    cfg.n_heads = 4;
    cfg.n_layers = 1;
    cfg.d_ff = 16;
    cfg.vocab_size = vocab_size;
    cfg.dropout = 0.0;
    cfg.max_src_len = 32;
    cfg.max_tgt_len = 32;
    cfg.fusion_variant = variant;
    return cfg;
}

std::vector<corpus::EncodedRecord> random_records(std::mt19937_64& rng, std::size_t count, std::size_t vocab_size,
                                                  std::size_t min_src, std::size_t max_src, std::size_t min_tgt,
                                                  std::size_t max_tgt) {
    std::uniform_int_distribution<corpus::TokenId> tok(13, static_cast<corpus::TokenId>(vocab_size - 1));
    std::uniform_int_distribution<std::size_t> src_len(min_src, max_src);
    std::uniform_int_distribution<std::size_t> tgt_len(min_tgt, max_tgt);
    std::uniform_int_distribution<int> rating(1, 5);
    std::vector<corpus::EncodedRecord> out(count);
    for (auto& r : out) {
        const auto n = src_len(rng);
        for (std::size_t i = 0; i < n; ++i) r.src.push_back(tok(rng));
        r.tgt.push_back(corpus::Vocabulary::kSos);
        const auto m = tgt_len(rng);
        for (std::size_t i = 0; i < m; ++i) r.tgt.push_back(tok(rng));
        r.tgt.push_back(corpus::Vocabulary::kEos);
        r.rating = corpus::Vocabulary::kFirstRating + rating(rng) - 1;
        r.category = 13;
    }
    return out;
}

num::GradCheckResult full_model_grad_check(std::uint64_t seed, model::FusionVariant variant,
                                           const std::string& corrupt_op) {
    const auto cfg = tiny_config(variant);
    auto params = model::init_parameters(cfg, seed);
    std::mt19937_64 rng(seed + 1000);
    const auto records = random_records(rng, 2, cfg.vocab_size);
    const auto batch = model::make_batch(records);
    return num::grad_check(
        [&](num::Tape& tape, const std::vector<num::Var>& flat) {
            if (!corrupt_op.empty()) tape.corrupt_backward(corrupt_op);
            const auto vars = model::vars_from_list(params, flat);
            return model::forward_training(batch, vars, cfg, {}).loss;
        },
        model::parameter_list(params), 1e-5);
}

namespace {

const std::vector<std::string> kReviews = {
    "the app works but could be better",
    "i have mixed feelings about this",
    "not sure what to think of the update",
    "it does what it says",
    "used it for a week now",
    "some things are good some are not",
    "my friend recommended it to me",
    "the latest version changed a lot",
    "i open it every day",
    "it is an app on my phone",
};

const std::vector<std::string> kCategories = {"TOOLS", "GAME", "PHOTOGRAPHY", "PRODUCTIVITY"};

const std::vector<std::string> kCategoryTemplates = {
    "our cleaner frees storage space quickly and safely",
    "new levels and rewards arrive in the next season",
    "try the portrait filter for sharper selfies tonight",
    "tasks now sync across every device you use daily",
};

const std::vector<std::string> kRatingTemplates = {
    "we are very sorry please email support so we can fix it",
    "sorry about that problem a patch is coming soon",
    "thanks we will keep improving every feature",
    "glad you like it more updates are planned",
    "wow thank you so much for the five stars",
};

corpus::ReviewRecord make_record(SyntheticKey key, std::mt19937_64& rng, std::size_t cls) {
    std::uniform_int_distribution<std::size_t> review(0, kReviews.size() - 1);
    std::uniform_int_distribution<int> rating(1, 5);
    std::uniform_int_distribution<std::size_t> category(0, kCategories.size() - 1);
    corpus::ReviewRecord r;
    r.app_name = "demo";
    r.review_text = kReviews[review(rng)];
    if (key == SyntheticKey::category) {
        r.category = kCategories[cls];
        r.rating = rating(rng);
        r.response_text = kCategoryTemplates[cls];
    } else {
        r.category = kCategories[category(rng)];
        r.rating = static_cast<int>(cls) + 1;
        r.response_text = kRatingTemplates[cls];
    }
    return r;
}

}  // namespace

app::Dataset synthetic_dataset(SyntheticKey key, std::size_t train_size, std::size_t test_size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t classes = key == SyntheticKey::category ? kCategories.size() : kRatingTemplates.size();
    app::Dataset ds;
    // Balanced classes, interleaved so every prefix is balanced too.
    for (std::size_t i = 0; i < train_size; ++i) ds.train.push_back(make_record(key, rng, i % classes));
    for (std::size_t i = 0; i < test_size; ++i) ds.test.push_back(make_record(key, rng, i % classes));
    return ds;
}

app::RunConfig synthetic_run_config() {
    app::RunConfig config;
    config.model.d_model = 32;
    config.model.n_heads = 4;
    config.model.n_layers = 1;
    config.model.d_ff = 64;
    config.model.dropout = 0.0;
    config.model.max_src_len = 32;
    config.model.max_tgt_len = 32;
    config.preprocess.max_review_tokens = 30;
    config.preprocess.max_response_tokens = 32;
    config.optimizer.learning_rate = 3e-3;
    config.batch_size = 16;
    config.epochs = 15;
    config.min_train_loss = 0.01;
    config.min_freq = 1;
    config.seed = 7;
    return config;
}

}  // namespace trrgen::testing
