#include "kgr/runner.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "kgr/errors.hpp"
#include "kgr/llm_client.hpp"
#include "kgr/prompting.hpp"
#include "kgr/util.hpp"

namespace kgr {

using nlohmann::json;

namespace {

std::string echo_answer(const Query& query) {
    if (query.kind == TaskKind::ContextualPathGeneration) {
        return render_path(query.ground_truth_path());
    }
    return query.ground_truth_iri().value();
}

std::vector<Query> load_all_tasks(const RunConfig& config, const Snapshot& snapshot) {
    std::vector<Query> queries;
    std::set<std::string> ids;
    for (const auto& file : config.task_files) {
        for (Query& q : load_tasks(file, snapshot.graph, snapshot.ontology)) {
            if (!ids.insert(q.id).second) {
                throw DataError("query id '" + q.id + "' appears in more than one task file");
            }
            queries.push_back(std::move(q));
        }
    }
    if (queries.empty()) {
        throw DataError("no queries found in the configured task files");
    }
    return queries;
}

struct WorkItem {
    const Query* query = nullptr;
    int trial = 0;
    Strategy strategy = Strategy::SingleStep;
};

// Mirrors the executor's request construction so mock responses can be
// registered on the transport before the run starts.
void register_mock(ScriptedTransport& transport, const MockScript& script,
                   const std::vector<Query>& queries, const ModelSpec& spec,
                   const PromptLibrary& prompts) {
    if (script.default_response) {
        transport.set_default(*script.default_response);
    }
    GenerationParams params{spec.wire_model, 0.0, spec.max_tokens};
    for (const Query& q : queries) {
        Strategy strategy = effective_strategy(spec.strategy, q.kind);
        if (strategy == Strategy::MultiStep) {
            auto it = script.step_responses.find(q.id);
            if (it == script.step_responses.end()) {
                if (!script.default_response) {
                    throw DataError("mock script has no steps for multi-step query '" + q.id +
                                    "'");
                }
                continue;
            }
            const auto& steps = it->second;
            if (steps.size() != 3) {
                throw DataError("mock script for query '" + q.id + "' must have 3 steps, got " +
                                std::to_string(steps.size()));
            }
            transport.script(
                LlmRequest::single_user(params.wire_model, prompts.render_step1(q),
                                        params.temperature, params.max_tokens),
                steps[0]);
            transport.script(
                LlmRequest::single_user(params.wire_model, prompts.render_step2(q, steps[0]),
                                        params.temperature, params.max_tokens),
                steps[1]);
            std::vector<Iri> linked;
            for (const Iri& mention : scan_iri_mentions(steps[1])) {
                if (mention.kind() == IriKind::Entity) {
                    linked.push_back(mention);
                }
            }
            if (linked.size() >= 2) {
                transport.script(
                    LlmRequest::single_user(
                        params.wire_model,
                        prompts.render_step3(linked[0].value(), linked[1].value(), steps[0]),
                        params.temperature, params.max_tokens),
                    steps[2]);
            }
            continue;
        }
        auto it = script.responses.find(q.id);
        if (it == script.responses.end()) {
            if (!script.default_response) {
                throw DataError("mock script has no response for query '" + q.id + "'");
            }
            continue;
        }
        transport.script(LlmRequest::single_user(params.wire_model,
                                                 prompts.render(q, strategy),
                                                 params.temperature, params.max_tokens),
                         it->second);
    }
}

std::shared_ptr<Transport> make_transport(const ModelSpec& spec,
                                          const std::vector<Query>& queries,
                                          const PromptLibrary& prompts) {
    if (spec.endpoint == "mock:echo") {
        auto transport = std::make_shared<ScriptedTransport>("mock:echo");
        register_mock(*transport, MockScript::echo(queries, spec.strategy), queries, spec,
                      prompts);
        return transport;
    }
    if (spec.endpoint == "mock:script") {
        auto transport = std::make_shared<ScriptedTransport>("mock:script");
        register_mock(*transport, MockScript::load(spec.mock_script), queries, spec, prompts);
        return transport;
    }
    if (spec.endpoint.rfind("http://", 0) == 0 || spec.endpoint.rfind("https://", 0) == 0) {
        return std::make_shared<HttpTransport>(spec.endpoint);
    }
    throw DataError("model '" + spec.name + "': unknown endpoint '" + spec.endpoint +
                    "'; expected mock:echo, mock:script or an http(s) URL");
}

template <typename Fn>
void parallel_for(size_t count, int max_in_flight, Fn&& fn) {
    size_t workers = std::min<size_t>(static_cast<size_t>(std::max(max_in_flight, 1)), count);
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                fn(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

std::vector<RunRecord> execute_model(const RunConfig& config, const ModelSpec& spec,
                                     const std::vector<Query>& queries,
                                     const PromptLibrary& prompts) {
    std::shared_ptr<Transport> transport;
    if (!config.replay) {
        transport = make_transport(spec, queries, prompts);
    }
    LlmClient client(config.cache_dir, transport, config.replay);
    GenerationParams params{spec.wire_model, 0.0, spec.max_tokens};

    std::vector<WorkItem> items;
    for (const Query& q : queries) {
        Strategy strategy = effective_strategy(spec.strategy, q.kind);
        int trials = q.kind == TaskKind::ContextualPathGeneration ? config.trials_cpg
                                                                  : config.trials_relation;
        for (int trial = 0; trial < trials; ++trial) {
            items.push_back({&q, trial, strategy});
        }
    }

    std::vector<RunRecord> records(items.size());
    auto base_record = [&](const WorkItem& item) {
        RunRecord r;
        r.query_id = item.query->id;
        r.kind = std::string(to_string(item.query->kind));
        r.model = spec.name;
        r.strategy = std::string(to_string(spec.strategy));
        r.trial = item.trial;
        r.config_hash = config.config_hash;
        return r;
    };

    // Single-request items run through run_batch; multi-step pipelines get
    // their own pool so the three chained calls stay sequential per item.
    std::vector<size_t> single_indices;
    std::vector<size_t> multi_indices;
    for (size_t i = 0; i < items.size(); ++i) {
        (items[i].strategy == Strategy::MultiStep ? multi_indices : single_indices).push_back(i);
    }

    std::vector<BatchItem> batch;
    batch.reserve(single_indices.size());
    for (size_t i : single_indices) {
        const WorkItem& item = items[i];
        std::string prompt = prompts.render(*item.query, item.strategy);
        RunRecord& r = records[i];
        r = base_record(item);
        r.prompt_sha256 = util::sha256_hex(prompt);
        LlmRequest request = LlmRequest::single_user(params.wire_model, prompt,
                                                     params.temperature, params.max_tokens);
        r.cache_keys.push_back(cache_key(request, item.trial));
        batch.push_back({std::move(request), item.trial});
    }
    std::vector<BatchOutcome> outcomes = client.run_batch(batch, config.max_in_flight);
    for (size_t b = 0; b < single_indices.size(); ++b) {
        RunRecord& r = records[single_indices[b]];
        if (outcomes[b].ok) {
            r.response_text = outcomes[b].text;
        } else {
            r.error = outcomes[b].error;
        }
    }

    parallel_for(multi_indices.size(), config.max_in_flight, [&](size_t m) {
        size_t i = multi_indices[m];
        const WorkItem& item = items[i];
        RunRecord r = base_record(item);
        PipelineTrace trace = run_multi_step(*item.query, client, params, item.trial, prompts);
        std::string all_prompts;
        for (const PipelineStep& step : trace.steps) {
            all_prompts += step.prompt;
            r.cache_keys.push_back(cache_key(
                LlmRequest::single_user(params.wire_model, step.prompt, params.temperature,
                                        params.max_tokens),
                item.trial));
        }
        r.prompt_sha256 = util::sha256_hex(all_prompts);
        r.response_text = trace.final_response;
        r.error = trace.error;
        r.trace_json = trace.to_json();
        records[i] = std::move(r);
    });

    return records;
}

} // namespace

MockScript MockScript::echo(const std::vector<Query>& queries, Strategy strategy) {
    MockScript script;
    for (const Query& q : queries) {
        if (effective_strategy(strategy, q.kind) == Strategy::MultiStep) {
            std::string linking = q.head.value() + ", " + (q.tail ? q.tail->value() : "");
            script.step_responses[q.id] = {q.context, linking, echo_answer(q)};
        } else {
            script.responses[q.id] = echo_answer(q);
        }
    }
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    MockScript script;
    json j = json::parse(util::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw DataError("mock script is not a JSON object: " + path.string());
    }
    if (j.contains("default")) {
        script.default_response = j["default"].get<std::string>();
    }
    if (j.contains("by_query")) {
        for (const auto& [id, entry] : j["by_query"].items()) {
            if (entry.contains("steps")) {
                script.step_responses[id] = entry["steps"].get<std::vector<std::string>>();
            }
            if (entry.contains("response")) {
                script.responses[id] = entry["response"].get<std::string>();
            }
            if (!entry.contains("steps") && !entry.contains("response")) {
                throw DataError("mock script entry '" + id +
                                "' needs a 'response' or 'steps' field");
            }
        }
    }
    return script;
}

RunSummary run_all(const RunConfig& config) {
    Snapshot snapshot = load_snapshot(config.triples_file, config.ontology_file);
    PromptLibrary prompts = PromptLibrary::load(config.prompts_dir);
    std::vector<Query> queries = load_all_tasks(config, snapshot);

    RunSummary summary;
    for (const ModelSpec& spec : config.models) {
        std::vector<RunRecord> records = execute_model(config, spec, queries, prompts);
        std::filesystem::path file = config.records_dir() / (spec.name + ".jsonl");
        write_records(file, records);
        summary.records += records.size();
        for (const RunRecord& r : records) {
            if (!r.error.empty()) {
                ++summary.failures;
            }
        }
        summary.record_files.push_back(file);
    }
    return summary;
}

RunSummary run_baseline(const RunConfig& config, const std::string& name) {
    Snapshot snapshot = load_snapshot(config.triples_file, config.ontology_file);
    std::vector<Query> queries = load_all_tasks(config, snapshot);

    std::vector<RunRecord> records;
    for (const Query& q : queries) {
        if (q.kind != TaskKind::ContextualPathGeneration) {
            continue;
        }
        RunRecord r;
        r.query_id = q.id;
        r.kind = std::string(to_string(q.kind));
        r.model = name;
        r.strategy = "graph-baseline";
        r.trial = 0;
        r.config_hash = config.config_hash;
        std::optional<KgPath> path = snapshot.graph.shortest_path(q.head, *q.tail);
        if (path) {
            r.response_text = render_path(*path);
        } else {
            r.error = "no path between '" + q.head.value() + "' and '" + q.tail->value() + "'";
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) {
        throw DataError("baseline needs at least one path-generation query");
    }

    RunSummary summary;
    std::filesystem::path file = config.records_dir() / (name + ".jsonl");
    write_records(file, records);
    summary.records = records.size();
    for (const RunRecord& r : records) {
        if (!r.error.empty()) {
            ++summary.failures;
        }
    }
    summary.record_files.push_back(file);
    return summary;
}

ScoreInputs load_score_inputs(const RunConfig& config) {
    ScoreInputs inputs;
    inputs.snapshot = load_snapshot(config.triples_file, config.ontology_file);
    inputs.queries = load_all_tasks(config, inputs.snapshot);
    if (!config.labels_file.empty() && std::filesystem::exists(config.labels_file)) {
        inputs.labels = LabelStore::load(config.labels_file);
    }
    inputs.records = load_records_dir(config.records_dir());
    return inputs;
}

MetricReport score_run(const RunConfig& config) {
    ScoreInputs inputs = load_score_inputs(config);
    return aggregate(inputs.records, index_queries(inputs.queries), inputs.snapshot,
                     inputs.labels);
}

} // namespace kgr
