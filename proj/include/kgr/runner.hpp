#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgr/config.hpp"
#include "kgr/metrics.hpp"
#include "kgr/records.hpp"
#include "kgr/tasks.hpp"

namespace kgr {

struct RunSummary {
    size_t records = 0;
    size_t failures = 0;
    std::vector<std::filesystem::path> record_files;
};

// Loads the snapshot, tasks and prompts named by the config and drives every
// configured model over every query: trials_cpg generations per path query,
// trials_relation otherwise. Responses (and failures) land in one record
// file per model under <out>/records/. Requests go through the cache, so a
// re-run with a warm cache or replay=true reproduces the files byte for
// byte.
RunSummary run_all(const RunConfig& config);

// Graph-only reference model for the path task: emits the deterministic
// shortest path for each query, one trial, no endpoint involved.
RunSummary run_baseline(const RunConfig& config, const std::string& name = "shortest-path");

struct ScoreInputs {
    Snapshot snapshot;
    std::vector<Query> queries;
    LabelStore labels;
    std::vector<RunRecord> records;
};

ScoreInputs load_score_inputs(const RunConfig& config);
MetricReport score_run(const RunConfig& config);

// Canned responses for one model endpoint. mock:echo answers every query
// with its ground truth; mock:script reads this structure from a JSON file.
struct MockScript {
    std::optional<std::string> default_response;
    std::map<std::string, std::string> responses;                 // query id -> text
    std::map<std::string, std::vector<std::string>> step_responses;  // query id -> 3 step texts

    static MockScript load(const std::filesystem::path& path);
    static MockScript echo(const std::vector<Query>& queries, Strategy strategy);
};

} // namespace kgr
