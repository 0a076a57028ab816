#include "multike/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <stdexcept>

#include "multike/common.hpp"

namespace multike {

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (epochs < 1) fail("epochs must be >= 1");
    if (dim < 1) fail("dim must be >= 1");
    if (lr <= 0.0) fail("lr must be positive");
    if (negatives < 0) fail("negatives must be >= 0");
    if (filters < 1) fail("filters must be >= 1");
    if (kernel < 1 || kernel >= dim) fail("kernel width must satisfy 1 <= kernel < dim");
    if (alpha1 <= 0.0 || alpha2 <= 0.0) fail("alpha1 and alpha2 must be positive");
    if (std::fabs(alpha1 + alpha2 - 1.0) > 1e-9) fail("alpha1 + alpha2 must equal 1");
    if (eta <= 0.0 || eta > 1.0) fail("eta must be in (0, 1]");
    if (norm != "L1" && norm != "L2" && norm != "l1" && norm != "l2")
        fail("norm must be L1 or L2");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (combination != "wva" && combination != "ssl" && combination != "itc")
        fail("combination must be one of wva, ssl, itc");
    if (seed_ratio < 0.0 || seed_ratio > 1.0) fail("seed_ratio must be in [0, 1]");
    if (use_cra != 0 && use_cra != 1) fail("use_cra must be 0 or 1");
    if (sg_window < 1) fail("sg_window must be >= 1");
    if (sg_negatives < 0) fail("sg_negatives must be >= 0");
    if (sg_epochs < 0) fail("sg_epochs must be >= 0");
    if (ae_epochs < 0) fail("ae_epochs must be >= 0");
    if (ae_lr <= 0.0) fail("ae_lr must be positive");
    if (ae_batch < 1) fail("ae_batch must be >= 1");
    if (ssl_epochs < 1) fail("ssl_epochs must be >= 1");
    if (ssl_lr <= 0.0) fail("ssl_lr must be positive");
    if (candidates != "test" && candidates != "all") fail("candidates must be test or all");
    if (threads < 0) fail("threads must be >= 0");
}

namespace {

struct Field {
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
T parse_number(const std::string& key, const std::string& value);

template <>
int parse_number<int>(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': not an integer: " + value);
    return v;
}

template <>
double parse_number<double>(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': not a number: " + value);
    return v;
}

template <>
std::uint64_t parse_number<std::uint64_t>(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': not an unsigned integer: " +
                                    value);
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

using FieldMap = std::vector<std::pair<std::string, Field>>;

const FieldMap& field_map() {
    auto num = [](auto member) {
        using T = std::decay_t<decltype(std::declval<TrainConfig>().*member)>;
        return Field{[member](TrainConfig& c, const std::string& v) {
                         c.*member = parse_number<T>("", v);
                     },
                     [member](const TrainConfig& c) {
                         if constexpr (std::is_same_v<T, double>)
                             return format_double(c.*member);
                         else
                             return std::to_string(c.*member);
                     }};
    };
    auto str = [](auto member) {
        return Field{[member](TrainConfig& c, const std::string& v) { c.*member = v; },
                     [member](const TrainConfig& c) { return c.*member; }};
    };
    static const FieldMap fields = {
        {"epochs", num(&TrainConfig::epochs)},
        {"lr", num(&TrainConfig::lr)},
        {"dim", num(&TrainConfig::dim)},
        {"negatives", num(&TrainConfig::negatives)},
        {"filters", num(&TrainConfig::filters)},
        {"kernel", num(&TrainConfig::kernel)},
        {"alpha1", num(&TrainConfig::alpha1)},
        {"alpha2", num(&TrainConfig::alpha2)},
        {"eta", num(&TrainConfig::eta)},
        {"norm", str(&TrainConfig::norm)},
        {"batch_size", num(&TrainConfig::batch_size)},
        {"rng_seed", num(&TrainConfig::rng_seed)},
        {"combination", str(&TrainConfig::combination)},
        {"seed_ratio", num(&TrainConfig::seed_ratio)},
        {"use_cra", num(&TrainConfig::use_cra)},
        {"sg_window", num(&TrainConfig::sg_window)},
        {"sg_negatives", num(&TrainConfig::sg_negatives)},
        {"sg_epochs", num(&TrainConfig::sg_epochs)},
        {"ae_epochs", num(&TrainConfig::ae_epochs)},
        {"ae_lr", num(&TrainConfig::ae_lr)},
        {"ae_batch", num(&TrainConfig::ae_batch)},
        {"ssl_epochs", num(&TrainConfig::ssl_epochs)},
        {"ssl_lr", num(&TrainConfig::ssl_lr)},
        {"word_vectors", str(&TrainConfig::word_vectors)},
        {"candidates", str(&TrainConfig::candidates)},
        {"threads", num(&TrainConfig::threads)},
    };
    return fields;
}

const Field& find_field(const std::string& key) {
    for (const auto& [name, field] : field_map())
        if (name == key) return field;
    throw std::invalid_argument("unknown config key: " + key);
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : field_map()) out.push_back(name);
        return out;
    }();
    return keys;
}

void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value) {
    try {
        find_field(key).set(cfg, value);
    } catch (const std::invalid_argument& e) {
        // re-raise numeric errors with the key attached
        std::string what = e.what();
        if (what.find("config key ''") == 0)
            throw std::invalid_argument("config key '" + key + "'" + what.substr(13));
        throw;
    }
}

std::string config_get(const TrainConfig& cfg, const std::string& key) {
    return find_field(key).get(cfg);
}

void load_config_file(TrainConfig& cfg, const std::string& path) {
    std::string text = read_file(path);
    auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value in config file, got \"" + line + "\"", i + 1);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        apply_config_kv(cfg, key, value);
    }
}

std::vector<std::string> apply_env_overrides(TrainConfig& cfg) {
    std::vector<std::string> applied;
    for (const auto& key : config_keys()) {
        std::string env_name = "MULTIKE_";
        for (char c : key) env_name.push_back(static_cast<char>(std::toupper(c)));
        if (const char* value = std::getenv(env_name.c_str())) {
            apply_config_kv(cfg, key, value);
            applied.push_back(key);
        }
    }
    return applied;
}

} // namespace multike
