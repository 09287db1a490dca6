#include "trrgen/app/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "trrgen/error.hpp"
#include "trrgen/model/transformer.hpp"
#include "trrgen/numerics/adam.hpp"

namespace trrgen::app {

namespace {

// Independent streams for shuffling and dropout so changing one consumer
// never shifts the other.
constexpr std::uint64_t kShuffleStream = 0x53485546464c45ULL;
constexpr std::uint64_t kDropoutStream = 0x44524f504f5554ULL;

std::size_t target_tokens(const model::Batch& batch) {
    return static_cast<std::size_t>(
        std::count_if(batch.tgt_label.begin(), batch.tgt_label.end(),
                      [](corpus::TokenId id) { return id != corpus::Vocabulary::kPad; }));
}

std::vector<corpus::EncodedRecord> gather(const std::vector<corpus::EncodedRecord>& records,
                                          std::span<const std::size_t> order) {
    std::vector<corpus::EncodedRecord> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(records[i]);
    return out;
}

void check_loss(double loss, std::size_t epoch) {
    if (!std::isfinite(loss))
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                           "; lower learning_rate or check the data");
}

}  // namespace

nlohmann::ordered_json epoch_log_json(const EpochLog& log) {
    nlohmann::ordered_json j;
    j["epoch"] = log.epoch;
    j["train_loss"] = log.train_loss;
    if (log.valid_loss)
        j["valid_loss"] = *log.valid_loss;
    else
        j["valid_loss"] = nullptr;
    j["improved"] = log.improved;
    return j;
}

double mean_loss(const model::Model& model, const std::vector<corpus::EncodedRecord>& records,
                 std::size_t batch_size) {
    if (records.empty()) throw ValidationError("cannot compute the loss of an empty set");
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t begin = 0; begin < records.size(); begin += batch_size) {
        const auto end = std::min(records.size(), begin + batch_size);
        const auto batch = model::make_batch(std::span(records).subspan(begin, end - begin));
        num::Tape tape(false);
        const auto vars = model::bind_parameters(tape, model.params, false);
        const auto result = model::forward_training(batch, vars, model.config, {});
        const auto n = target_tokens(batch);
        total += result.loss.value().item() * static_cast<double>(n);
        tokens += n;
    }
    return total / static_cast<double>(tokens);
}

TrainResult train_model(const RunConfig& config, std::size_t vocab_size,
                        const std::vector<corpus::EncodedRecord>& train,
                        const std::vector<corpus::EncodedRecord>& valid, const LogSink& sink) {
    config.validate();
    if (train.empty()) throw ValidationError("training set is empty");

    model::Model model{config.model_config(vocab_size), {}};
    model.config.validate();
    model.params = model::init_parameters(model.config, config.seed);

    std::mt19937_64 shuffle_rng(config.seed ^ kShuffleStream);
    std::mt19937_64 dropout_rng(config.seed ^ kDropoutStream);

    auto param_list = model::parameter_list(model.params);
    num::AdamState adam(config.optimizer,
                        std::vector<const num::Tensor*>(param_list.begin(), param_list.end()));

    TrainResult result;
    auto emit = [&](const EpochLog& entry) {
        result.log.push_back(entry);
        if (sink) sink(entry);
    };

    EpochLog initial;
    initial.train_loss = mean_loss(model, train, config.batch_size);
    check_loss(initial.train_loss, 0);
    if (!valid.empty()) {
        initial.valid_loss = mean_loss(model, valid, config.batch_size);
        result.meta.best_valid_loss = *initial.valid_loss;
        initial.improved = true;
    }
    result.params = model.params;
    emit(initial);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double total = 0.0;
        std::size_t tokens = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const auto end = std::min(order.size(), begin + config.batch_size);
            const auto records = gather(train, std::span(order).subspan(begin, end - begin));
            const auto batch = model::make_batch(records);

            num::Tape tape;
            const auto vars = model::bind_parameters(tape, model.params, true);
            const auto forward = model::forward_training(batch, vars, model.config, {true, &dropout_rng});
            const double loss = forward.loss.value().item();
            check_loss(loss, epoch);
            tape.backward(forward.loss);
            const auto grads = model::collect_gradients(tape, vars);
            num::adam_step(param_list, grads, adam);

            const auto n = target_tokens(batch);
            total += loss * static_cast<double>(n);
            tokens += n;
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = total / static_cast<double>(tokens);
        result.epochs_run = epoch;

        const bool validate_now = !valid.empty() && epoch % config.validate_every == 0;
        if (validate_now) {
            const double v = mean_loss(model, valid, config.batch_size);
            check_loss(v, epoch);
            entry.valid_loss = v;
            if (v < result.meta.best_valid_loss) {
                result.meta.best_valid_loss = v;
                result.meta.epoch = epoch;
                result.params = model.params;
                entry.improved = true;
                stale = 0;
            } else {
                ++stale;
            }
        } else if (valid.empty()) {
            result.meta.epoch = epoch;
            result.params = model.params;
        }
        emit(entry);

        if (validate_now && config.patience > 0 && stale >= config.patience) {
            result.early_stopped = true;
            break;
        }
        if (config.min_train_loss > 0.0 && entry.train_loss < config.min_train_loss) {
            if (valid.empty()) result.params = model.params;
            break;
        }
    }
    return result;
}

}  // namespace trrgen::app
