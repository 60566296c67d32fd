#include "kgr/config.hpp"

#include <algorithm>

#include "kgr/errors.hpp"
#include "kgr/util.hpp"

namespace kgr {

namespace {

bool valid_key(std::string_view key) {
    if (key.empty()) {
        return false;
    }
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

bool valid_model_name(std::string_view name) {
    if (name.empty()) {
        return false;
    }
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

} // namespace

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
    ConfigMap map;
    std::string content = util::read_file(path);
    size_t line_number = 0;
    for (const std::string& raw : util::split_lines(content)) {
        ++line_number;
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_number) +
                            ": expected 'key = value'");
        }
        std::string key(util::trim(line.substr(0, eq)));
        std::string value(util::trim(line.substr(eq + 1)));
        if (!valid_key(key)) {
            throw DataError(path.string() + ":" + std::to_string(line_number) +
                            ": invalid key '" + key + "'");
        }
        map.set(key, value);
    }
    return map;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

std::optional<std::string> ConfigMap::get(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? std::nullopt : std::optional<std::string>(it->second);
}

std::string ConfigMap::get_or(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

std::int64_t ConfigMap::get_int_or(const std::string& key, std::int64_t fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    try {
        size_t pos = 0;
        std::int64_t out = std::stoll(*v, &pos);
        if (pos != v->size()) {
            throw std::invalid_argument("trailing characters");
        }
        return out;
    } catch (const std::exception&) {
        throw DataError("config key '" + key + "' must be an integer, got '" + *v + "'");
    }
}

bool ConfigMap::get_bool_or(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no") {
        return false;
    }
    throw DataError("config key '" + key + "' must be a boolean, got '" + *v + "'");
}

std::string ConfigMap::canonical_string() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
    RunConfig cfg;
    auto require = [&](const char* key) {
        auto v = map.get(key);
        if (!v || v->empty()) {
            throw DataError(std::string("config is missing '") + key + "'");
        }
        return *v;
    };
    cfg.triples_file = require("kg.triples");
    cfg.ontology_file = require("kg.ontology");
    for (const std::string& f : util::split_whitespace(require("tasks.files"))) {
        cfg.task_files.emplace_back(f);
    }
    cfg.prompts_dir = map.get_or("prompts.dir", "prompts");
    cfg.cache_dir = map.get_or("run.cache_dir", "cache");
    cfg.out_dir = map.get_or("run.out_dir", "out");
    cfg.labels_file = map.get_or("labels.file", "");
    cfg.trials_relation = static_cast<int>(map.get_int_or("run.trials_relation", 10));
    cfg.trials_cpg = static_cast<int>(map.get_int_or("run.trials_cpg", 5));
    cfg.max_in_flight = static_cast<int>(map.get_int_or("run.max_in_flight", 4));
    cfg.seed = static_cast<std::uint64_t>(map.get_int_or("run.seed", 42));
    cfg.replay = map.get_bool_or("run.replay", false);
    if (cfg.trials_relation < 1 || cfg.trials_cpg < 1) {
        throw DataError("trial counts must be at least 1");
    }
    if (cfg.max_in_flight < 1) {
        throw DataError("run.max_in_flight must be at least 1");
    }

    std::vector<std::string> names;
    for (const auto& [key, value] : map.values()) {
        if (key.rfind("model.", 0) != 0) {
            continue;
        }
        size_t dot = key.find('.', 6);
        if (dot == std::string::npos) {
            throw DataError("malformed model key '" + key + "'");
        }
        std::string name = key.substr(6, dot - 6);
        if (!valid_model_name(name)) {
            throw DataError("invalid model name '" + name + "'");
        }
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            names.push_back(name);
        }
    }
    for (const std::string& name : names) {
        ModelSpec spec;
        spec.name = name;
        std::string prefix = "model." + name + ".";
        auto endpoint = map.get(prefix + "endpoint");
        if (!endpoint || endpoint->empty()) {
            throw DataError("model '" + name + "' has no endpoint");
        }
        spec.endpoint = *endpoint;
        spec.wire_model = map.get_or(prefix + "wire_model", name);
        std::string strategy_name = map.get_or(prefix + "strategy", "single-step");
        auto strategy = strategy_from_string(strategy_name);
        if (!strategy) {
            throw DataError("model '" + name + "': unknown strategy '" + strategy_name + "'");
        }
        spec.strategy = *strategy;
        spec.mock_script = map.get_or(prefix + "mock_script", "");
        spec.max_tokens = static_cast<int>(map.get_int_or(prefix + "max_tokens", 512));
        if (spec.endpoint == "mock:script" && spec.mock_script.empty()) {
            throw DataError("model '" + name + "' uses mock:script but has no mock_script file");
        }
        cfg.models.push_back(std::move(spec));
    }
    if (cfg.models.empty()) {
        throw DataError("config declares no models");
    }
    // The hash fingerprints what the run generates, not where results land
    // or how requests are scheduled; replaying a cached run keeps the hash.
    static const std::vector<std::string> kExecutionOnly = {
        "run.cache_dir", "run.out_dir", "run.max_in_flight", "run.replay", "labels.file",
    };
    ConfigMap semantic;
    for (const auto& [key, value] : map.values()) {
        if (std::find(kExecutionOnly.begin(), kExecutionOnly.end(), key) ==
            kExecutionOnly.end()) {
            semantic.set(key, value);
        }
    }
    cfg.config_hash = util::sha256_hex16(semantic.canonical_string());
    return cfg;
}

} // namespace kgr
