#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "trrgen/app/checkpoint.hpp"
#include "trrgen/app/run_config.hpp"
#include "trrgen/corpus/encode.hpp"
#include "trrgen/model/parameters.hpp"

namespace trrgen::app {

struct EpochLog {
    std::size_t epoch = 0;  // 0 is the untrained model
    double train_loss = 0.0;
    std::optional<double> valid_loss;
    bool improved = false;
};

nlohmann::ordered_json epoch_log_json(const EpochLog& log);

using LogSink = std::function<void(const EpochLog&)>;

struct TrainResult {
    model::Parameters params;  // best-validation weights (last epoch without a validation set)
    TrainingMeta meta;
    std::vector<EpochLog> log;
    std::size_t epochs_run = 0;
    bool early_stopped = false;
};

// Token-weighted mean cross entropy of `records` under `params`, without
// dropout or gradients.
double mean_loss(const model::Model& model, const std::vector<corpus::EncodedRecord>& records,
                 std::size_t batch_size);

// Mini-batch Adam with teacher forcing. Logs epoch 0 (initial losses), then
// every epoch; validates every `validate_every` epochs when `valid` is
// non-empty and stops after `patience` validations without improvement
// (patience 0 disables early stopping). Throws NumericError on a non-finite
// loss and ValidationError if the training set is empty.
TrainResult train_model(const RunConfig& config, std::size_t vocab_size,
                        const std::vector<corpus::EncodedRecord>& train,
                        const std::vector<corpus::EncodedRecord>& valid, const LogSink& sink = {});

}  // namespace trrgen::app
