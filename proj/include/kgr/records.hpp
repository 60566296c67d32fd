#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kgr {

// One generation: a (query, trial) cell for one model. Records carry no
// wall-clock fields so a replayed run writes byte-identical files.
struct RunRecord {
    std::string query_id;
    std::string kind;            // task kind short name
    std::string model;
    std::string strategy;
    int trial = 0;
    std::string prompt_sha256;   // hash over all prompt bytes of the generation
    std::vector<std::string> cache_keys;
    std::string response_text;
    std::string error;           // non-empty when the generation failed
    std::string trace_json;      // serialized pipeline trace, multi-step only
    std::string config_hash;
};

std::string record_to_line(const RunRecord& record);

std::vector<RunRecord> load_records(const std::filesystem::path& file);

// Reads every *.jsonl under dir, in filename order.
std::vector<RunRecord> load_records_dir(const std::filesystem::path& dir);

void write_records(const std::filesystem::path& file, const std::vector<RunRecord>& records);

} // namespace kgr
