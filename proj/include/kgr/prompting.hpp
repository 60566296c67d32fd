#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgr/llm_client.hpp"
#include "kgr/tasks.hpp"

namespace kgr {

// How a query is turned into requests:
//   SingleStep         one request with the task prompt
//   SingleStepAutoCoT  single-step prompt plus the fixed think-aloud suffix
//   MultiStep          three chained requests (path generation only)
//   SimpleInstruction  bare instruction without format guidance (path
//                      generation only)
enum class Strategy { SingleStep, SingleStepAutoCoT, MultiStep, SimpleInstruction };

std::string_view to_string(Strategy strategy);
std::optional<Strategy> strategy_from_string(std::string_view name);

// Strategies specific to path generation fall back to SingleStep elsewhere.
Strategy effective_strategy(Strategy strategy, TaskKind kind);

extern const char* const kAutoCotSuffix;

// Prompt templates live in text files with {placeholder} slots; substituted
// values are never re-scanned, so braces inside a context are inert. An
// unknown placeholder in a template is a DataError.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    // Single-request prompt for the query under the given strategy. Asking
    // for MultiStep here is a UsageError; use the step renderers.
    std::string render(const Query& query, Strategy strategy) const;

    std::string render_step1(const Query& query) const;
    std::string render_step2(const Query& query, const std::string& support_sentences) const;
    std::string render_step3(const std::string& linked_head, const std::string& linked_tail,
                             const std::string& support_sentences) const;

    const std::string& raw_template(const std::string& name) const;
    static const std::vector<std::string>& template_names();

private:
    std::map<std::string, std::string> templates_;
};

struct PipelineStep {
    std::string name;
    std::string prompt;
    std::string response;
};

struct PipelineTrace {
    std::vector<PipelineStep> steps;
    std::string support_sentences;
    std::string linked_head;
    std::string linked_tail;
    std::string final_response;
    std::vector<std::string> warnings;
    std::string error;

    bool failed() const { return !error.empty(); }
    std::string to_json() const;
};

struct GenerationParams {
    std::string wire_model;
    double temperature = 0.0;
    int max_tokens = 512;
};

// Runs the three-step pipeline for one query: collect support sentences,
// link the endpoints to dbr: entities, then generate the path between the
// linked entities. Exactly one request per step; a step failure stops the
// pipeline with the error recorded in the trace.
PipelineTrace run_multi_step(const Query& query, LlmClient& client,
                             const GenerationParams& params, int trial,
                             const PromptLibrary& prompts);

} // namespace kgr
