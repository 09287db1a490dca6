#include "trrgen/app/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "trrgen/error.hpp"

namespace trrgen::app {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <class T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        T value;
        std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
        return value;
    }

    std::string_view take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw IoError("checkpoint is truncated");
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

model::Model Checkpoint::model() const {
    return {config.model_config(vocab.size()), params};
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
    nlohmann::ordered_json header;
    header["config"] = config_to_json(checkpoint.config);
    header["vocabulary"] = checkpoint.vocab.tokens();
    header["training"]["epoch"] = checkpoint.meta.epoch;
    if (std::isfinite(checkpoint.meta.best_valid_loss))
        header["training"]["best_valid_loss"] = checkpoint.meta.best_valid_loss;
    else
        header["training"]["best_valid_loss"] = nullptr;
    const std::string text = header.dump();

    std::string out(kCheckpointMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out += text;

    std::uint32_t count = 0;
    model::for_each_weight(checkpoint.params, [&](const std::string&, const num::Tensor&) { ++count; });
    put<std::uint32_t>(out, count);
    model::for_each_weight(checkpoint.params, [&](const std::string& name, const num::Tensor& t) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) put<std::uint64_t>(out, d);
        for (double v : t.values()) put<double>(out, v);
    });
    return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
    Reader in(bytes);
    if (bytes.size() < kCheckpointMagic.size() || in.take(kCheckpointMagic.size()) != kCheckpointMagic)
        throw IoError("not a checkpoint (bad magic)");
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw ValidationError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                              std::to_string(kCheckpointVersion) + ")");
    const auto header_len = in.get<std::uint64_t>();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(in.take(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }

    Checkpoint ck;
    try {
        ck.config = config_from_json(header.at("config"));
        ck.vocab = corpus::Vocabulary::from_tokens(header.at("vocabulary").get<std::vector<std::string>>());
        const auto& training = header.at("training");
        ck.meta.epoch = training.at("epoch").get<std::size_t>();
        const auto& best = training.at("best_valid_loss");
        ck.meta.best_valid_loss = best.is_null() ? std::numeric_limits<double>::infinity() : best.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed checkpoint header: ") + e.what());
    }

    ck.params = model::zero_parameters(ck.config.model_config(ck.vocab.size()));
    std::vector<std::pair<std::string, num::Tensor*>> slots;
    model::for_each_weight(ck.params, [&](const std::string& name, num::Tensor& t) { slots.emplace_back(name, &t); });

    const auto count = in.get<std::uint32_t>();
    if (count != slots.size())
        throw ValidationError("checkpoint holds " + std::to_string(count) + " tensors; configuration implies " +
                              std::to_string(slots.size()));
    for (auto& [name, slot] : slots) {
        const auto name_len = in.get<std::uint32_t>();
        const auto stored = in.take(name_len);
        if (stored != name)
            throw ValidationError("checkpoint tensor '" + std::string(stored) + "' where '" + name + "' was expected");
        const auto rank = in.get<std::uint32_t>();
        num::Shape shape(rank);
        for (auto& d : shape) d = in.get<std::uint64_t>();
        if (shape != slot->shape())
            throw ValidationError("checkpoint tensor '" + name + "' has shape " + num::shape_string(shape) +
                                  "; expected " + num::shape_string(slot->shape()));
        const auto raw = in.take(slot->size() * sizeof(double));
        std::memcpy(slot->data(), raw.data(), raw.size());
    }
    if (!in.done()) throw IoError("trailing bytes after checkpoint tensors");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const auto bytes = serialize_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_checkpoint(buffer.str());
}

}  // namespace trrgen::app
