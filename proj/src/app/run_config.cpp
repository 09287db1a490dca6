#include "trrgen/app/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "trrgen/error.hpp"

namespace trrgen::app {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw ConfigError("cannot format number");
    return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class M>
Field size_field(std::string key, M member) {
    return {key,
            [key, member](RunConfig& c, std::string_view v) { member(c) = parse_number<std::size_t>(key, v); },
            [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <class M>
Field double_field(std::string key, M member) {
    return {key, [key, member](RunConfig& c, std::string_view v) { member(c) = parse_number<double>(key, v); },
            [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); }};
}

template <class M>
Field bool_field(std::string key, M member) {
    return {key, [key, member](RunConfig& c, std::string_view v) { member(c) = parse_bool(key, v); },
            [member](const RunConfig& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <class M>
Field string_field(std::string key, M member) {
    return {key, [member](RunConfig& c, std::string_view v) { member(c) = std::string(v); },
            [member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); }};
}

#define TRRGEN_MEMBER(expr) [](RunConfig & c) -> auto& { return expr; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(size_field("d_model", TRRGEN_MEMBER(c.model.d_model)));
        f.push_back(size_field("n_heads", TRRGEN_MEMBER(c.model.n_heads)));
        f.push_back(size_field("n_layers", TRRGEN_MEMBER(c.model.n_layers)));
        f.push_back(size_field("d_ff", TRRGEN_MEMBER(c.model.d_ff)));
        f.push_back(size_field("max_src_len", TRRGEN_MEMBER(c.model.max_src_len)));
        f.push_back(size_field("max_tgt_len", TRRGEN_MEMBER(c.model.max_tgt_len)));
        f.push_back({"fusion_variant",
                     [](RunConfig& c, std::string_view v) { c.model.fusion_variant = model::parse_fusion_variant(v); },
                     [](const RunConfig& c) { return std::string(model::to_string(c.model.fusion_variant)); }});
        f.push_back(double_field("dropout", TRRGEN_MEMBER(c.model.dropout)));
        f.push_back(bool_field("tie_output_projection", TRRGEN_MEMBER(c.model.tie_output_projection)));
        f.push_back(double_field("layer_norm_eps", TRRGEN_MEMBER(c.model.layer_norm_eps)));

        f.push_back(bool_field("lowercase", TRRGEN_MEMBER(c.preprocess.lowercase)));
        f.push_back(bool_field("replace_app_name", TRRGEN_MEMBER(c.preprocess.replace_app_name)));
        f.push_back(string_field("email_pattern", TRRGEN_MEMBER(c.email_pattern)));
        f.push_back(string_field("url_pattern", TRRGEN_MEMBER(c.url_pattern)));
        f.push_back(string_field("user_id_pattern", TRRGEN_MEMBER(c.user_id_pattern)));
        f.push_back(string_field("app_name_pattern", TRRGEN_MEMBER(c.app_name_pattern)));
        f.push_back(size_field("ad_ngram_n", TRRGEN_MEMBER(c.preprocess.ad_ngram_n)));
        f.push_back(double_field("ad_flag_threshold", TRRGEN_MEMBER(c.preprocess.ad_flag_threshold)));
        f.push_back(size_field("max_review_tokens", TRRGEN_MEMBER(c.preprocess.max_review_tokens)));
        f.push_back(size_field("max_response_tokens", TRRGEN_MEMBER(c.preprocess.max_response_tokens)));
        f.push_back(bool_field("filter_ads", TRRGEN_MEMBER(c.filter_ads)));
        f.push_back(string_field("blocklist", TRRGEN_MEMBER(c.blocklist)));
        f.push_back(size_field("min_freq", TRRGEN_MEMBER(c.min_freq)));

        f.push_back({"strategy",
                     [](RunConfig& c, std::string_view v) { c.decode.strategy = gen::parse_decode_strategy(v); },
                     [](const RunConfig& c) { return std::string(gen::to_string(c.decode.strategy)); }});
        f.push_back(size_field("beam_width", TRRGEN_MEMBER(c.decode.beam_width)));
        f.push_back(size_field("decode_max_len", TRRGEN_MEMBER(c.decode.max_len)));
        f.push_back(double_field("length_penalty", TRRGEN_MEMBER(c.decode.length_penalty)));

        f.push_back(double_field("learning_rate", TRRGEN_MEMBER(c.optimizer.learning_rate)));
        f.push_back(double_field("beta1", TRRGEN_MEMBER(c.optimizer.beta1)));
        f.push_back(double_field("beta2", TRRGEN_MEMBER(c.optimizer.beta2)));
        f.push_back(double_field("adam_eps", TRRGEN_MEMBER(c.optimizer.epsilon)));

        f.push_back(string_field("data", TRRGEN_MEMBER(c.data)));
        f.push_back(string_field("train", TRRGEN_MEMBER(c.train)));
        f.push_back(string_field("valid", TRRGEN_MEMBER(c.valid)));
        f.push_back(string_field("test", TRRGEN_MEMBER(c.test)));
        f.push_back(string_field("vocab", TRRGEN_MEMBER(c.vocab)));
        f.push_back({"format",
                     [](RunConfig& c, std::string_view v) {
                         corpus::parse_corpus_format(v);
                         c.format = std::string(v);
                     },
                     [](const RunConfig& c) { return c.format; }});
        f.push_back(double_field("train_ratio", TRRGEN_MEMBER(c.split.train)));
        f.push_back(double_field("valid_ratio", TRRGEN_MEMBER(c.split.valid)));
        f.push_back(double_field("test_ratio", TRRGEN_MEMBER(c.split.test)));

        f.push_back(size_field("epochs", TRRGEN_MEMBER(c.epochs)));
        f.push_back(size_field("batch_size", TRRGEN_MEMBER(c.batch_size)));
        f.push_back(size_field("validate_every", TRRGEN_MEMBER(c.validate_every)));
        f.push_back(size_field("patience", TRRGEN_MEMBER(c.patience)));
        f.push_back(double_field("min_train_loss", TRRGEN_MEMBER(c.min_train_loss)));
        f.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        return f;
    }();
    return table;
}

#undef TRRGEN_MEMBER

const Field& field(std::string_view key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

}  // namespace

RunConfig::RunConfig() {
    const auto rules = corpus::default_placeholder_rules();
    for (const auto& r : rules) {
        if (r.name == "email") email_pattern = r.pattern;
        else if (r.name == "url") url_pattern = r.pattern;
        else if (r.name == "user_id") user_id_pattern = r.pattern;
    }
}

corpus::PreprocessConfig RunConfig::preprocess_config() const {
    corpus::PreprocessConfig out = preprocess;
    out.placeholder_rules = {
        {"email", email_pattern, std::string(corpus::kEmailToken)},
        {"url", url_pattern, std::string(corpus::kUrlToken)},
        {"user_id", user_id_pattern, std::string(corpus::kUserNameToken)},
        {"app_name", app_name_pattern, std::string(corpus::kAppNameToken)},
    };
    return out;
}

corpus::EncodeLimits RunConfig::encode_limits() const {
    return {preprocess.max_review_tokens, preprocess.max_response_tokens};
}

model::ModelConfig RunConfig::model_config(std::size_t vocab_size) const {
    model::ModelConfig out = model;
    out.vocab_size = vocab_size;
    out.seed = seed;
    return out;
}

void RunConfig::validate() const {
    model_config(corpus::Vocabulary::kReservedCount).validate();
    preprocess.validate();
    decode.validate();
    if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (validate_every < 1) throw ConfigError("validate_every must be at least 1");
    if (preprocess.max_review_tokens + 2 > model.max_src_len)
        throw ConfigError("max_src_len must cover max_review_tokens plus the two feature slots");
    if (preprocess.max_response_tokens > model.max_tgt_len + 1)
        throw ConfigError("max_tgt_len must cover max_response_tokens - 1 decoder positions");
}

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

bool is_run_config_key(std::string_view key) {
    for (const auto& f : fields())
        if (f.key == key) return true;
    return false;
}

void set_value(RunConfig& config, std::string_view key, std::string_view value) { field(key).set(config, value); }

std::string get_value(const RunConfig& config, std::string_view key) { return field(key).get(config); }

void apply_config_text(RunConfig& config, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) {
            // Patterns may legitimately contain '#'; only strip comments that
            // start a line.
            if (trim(view.substr(0, hash)).empty()) view = view.substr(0, hash);
        }
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        try {
            set_value(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str());
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
    return out;
}

nlohmann::json config_to_json(const RunConfig& config) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : fields()) j[f.key] = f.get(config);
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    RunConfig config;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw ConfigError("configuration value for '" + key + "' must be a string");
        set_value(config, key, value.get<std::string>());
    }
    return config;
}

void apply_environment(RunConfig& config) {
    if (const char* seed = std::getenv("TRRGEN_SEED"); seed && *seed) set_value(config, "seed", seed);
}

std::string config_digest(const RunConfig& config) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : format_config(config)) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace trrgen::app
