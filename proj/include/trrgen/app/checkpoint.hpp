#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include "trrgen/app/run_config.hpp"
#include "trrgen/corpus/vocabulary.hpp"
#include "trrgen/model/parameters.hpp"

namespace trrgen::app {

inline constexpr std::string_view kCheckpointMagic = "TRRGEN1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMeta {
    std::size_t epoch = 0;
    double best_valid_loss = std::numeric_limits<double>::infinity();
};

// Container layout (little-endian):
//   "TRRGEN1"  u32 version  u64 header bytes  JSON header
//   u32 tensor count, then per tensor:
//     u32 name bytes, name, u32 rank, u64 dims[rank], f64 values[]
// The header holds {"config": {key: value}, "vocabulary": [tokens],
// "training": {"epoch", "best_valid_loss"}}.
struct Checkpoint {
    RunConfig config;
    corpus::Vocabulary vocab;
    model::Parameters params;
    TrainingMeta meta;

    model::Model model() const;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws IoError on a missing file or bad magic, ValidationError on a version
// mismatch or tensors that do not fit the stored configuration.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace trrgen::app
