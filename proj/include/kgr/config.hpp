#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgr/prompting.hpp"

namespace kgr {

// Flat dotted-key configuration: one `key = value` per line, blank lines and
// full-line # comments ignored. Later assignments win, which is how CLI
// flags override file values.
class ConfigMap {
public:
    static ConfigMap load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    // Sorted `key=value` lines; config hashes are computed over this form.
    std::string canonical_string() const;

private:
    std::map<std::string, std::string> values_;
};

struct ModelSpec {
    std::string name;            // report label and record file stem
    std::string endpoint;        // mock:echo | mock:script | http(s)://...
    std::string wire_model;      // model field sent on the wire
    Strategy strategy = Strategy::SingleStep;
    std::filesystem::path mock_script;
    int max_tokens = 512;
};

struct RunConfig {
    std::filesystem::path triples_file;
    std::filesystem::path ontology_file;
    std::vector<std::filesystem::path> task_files;
    std::filesystem::path prompts_dir = "prompts";
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path out_dir = "out";
    std::filesystem::path labels_file;
    int trials_relation = 10;
    int trials_cpg = 5;
    int max_in_flight = 4;
    std::uint64_t seed = 42;
    bool replay = false;
    std::vector<ModelSpec> models;
    // Fingerprint of the semantic keys only: output locations, concurrency,
    // replay mode and the labels file do not change it.
    std::string config_hash;

    static RunConfig from_map(const ConfigMap& map);

    std::filesystem::path records_dir() const { return out_dir / "records"; }
};

} // namespace kgr
