#include "kgr/records.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

#include "kgr/errors.hpp"
#include "kgr/util.hpp"

namespace kgr {

using nlohmann::json;

std::string record_to_line(const RunRecord& record) {
    json j;
    j["query_id"] = record.query_id;
    j["kind"] = record.kind;
    j["model"] = record.model;
    j["strategy"] = record.strategy;
    j["trial"] = record.trial;
    j["prompt_sha256"] = record.prompt_sha256;
    j["cache_keys"] = record.cache_keys;
    j["response_text"] = record.response_text;
    j["error"] = record.error;
    if (!record.trace_json.empty()) {
        j["trace"] = json::parse(record.trace_json);
    }
    j["config_hash"] = record.config_hash;
    return j.dump();
}

namespace {

RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.query_id = j.at("query_id").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.trial = j.at("trial").get<int>();
    r.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
    r.cache_keys = j.at("cache_keys").get<std::vector<std::string>>();
    r.response_text = j.at("response_text").get<std::string>();
    r.error = j.at("error").get<std::string>();
    if (j.contains("trace")) {
        r.trace_json = j["trace"].dump();
    }
    r.config_hash = j.at("config_hash").get<std::string>();
    return r;
}

} // namespace

std::vector<RunRecord> load_records(const std::filesystem::path& file) {
    std::string content = util::read_file(file);
    std::vector<RunRecord> out;
    size_t line_number = 0;
    for (const std::string& raw : util::split_lines(content)) {
        ++line_number;
        auto line = util::trim(raw);
        if (line.empty()) {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw DataError(file.string() + ":" + std::to_string(line_number) + ": invalid JSON");
        }
        try {
            out.push_back(record_from_json(j));
        } catch (const json::exception& e) {
            throw DataError(file.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return out;
}

std::vector<RunRecord> load_records_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("records directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunRecord> out;
    for (const auto& file : files) {
        auto records = load_records(file);
        out.insert(out.end(), records.begin(), records.end());
    }
    return out;
}

void write_records(const std::filesystem::path& file, const std::vector<RunRecord>& records) {
    std::string out;
    for (const RunRecord& record : records) {
        out += record_to_line(record);
        out += "\n";
    }
    util::write_file_atomic(file, out);
}

} // namespace kgr
