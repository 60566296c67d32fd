#include "kgr/prompting.hpp"

#include "kgr/errors.hpp"
#include "kgr/path.hpp"
#include "kgr/util.hpp"

#include <algorithm>

namespace kgr {

using nlohmann::json;

const char* const kAutoCotSuffix = "\nLet's think step by step.";

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
    case Strategy::SingleStep: return "single-step";
    case Strategy::SingleStepAutoCoT: return "auto-cot";
    case Strategy::MultiStep: return "multi-step";
    case Strategy::SimpleInstruction: return "simple-instruction";
    }
    return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view name) {
    if (name == "single-step") return Strategy::SingleStep;
    if (name == "auto-cot") return Strategy::SingleStepAutoCoT;
    if (name == "multi-step") return Strategy::MultiStep;
    if (name == "simple-instruction") return Strategy::SimpleInstruction;
    return std::nullopt;
}

Strategy effective_strategy(Strategy strategy, TaskKind kind) {
    if (kind == TaskKind::ContextualPathGeneration) {
        return strategy;
    }
    if (strategy == Strategy::MultiStep || strategy == Strategy::SimpleInstruction) {
        return Strategy::SingleStep;
    }
    return strategy;
}

namespace {

const std::vector<std::string> kTemplateNames = {
    "tail_prediction__single_step",
    "relation_prediction__single_step",
    "relation_extraction__single_step",
    "cpg__single_step",
    "cpg__simple_instruction",
    "cpg__multi_step__1_support_sentences",
    "cpg__multi_step__2_entity_linking",
    "cpg__multi_step__3_path_generation",
    "auto_cot_suffix",
};

std::string substitute(const std::string& tpl,
                       const std::map<std::string, std::string>& values,
                       const std::string& name) {
    std::string out;
    out.reserve(tpl.size());
    size_t i = 0;
    while (i < tpl.size()) {
        char c = tpl[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        size_t close = tpl.find('}', i + 1);
        if (close == std::string::npos) {
            throw DataError("template '" + name + "': unterminated placeholder");
        }
        std::string key = tpl.substr(i + 1, close - i - 1);
        auto it = values.find(key);
        if (it == values.end()) {
            throw DataError("template '" + name + "': unknown placeholder {" + key + "}");
        }
        out += it->second;
        i = close + 1;
    }
    return out;
}

// Every slot any template may use. Checked at load so a bad prompt file
// fails before a run starts.
const std::vector<std::string> kKnownSlots = {
    "head_entity", "tail_entity", "relation", "context", "support_sentences",
};

void validate_template(const std::string& name, const std::string& tpl) {
    size_t i = 0;
    while ((i = tpl.find('{', i)) != std::string::npos) {
        size_t close = tpl.find('}', i + 1);
        if (close == std::string::npos) {
            throw DataError("template '" + name + "': unterminated placeholder");
        }
        std::string key = tpl.substr(i + 1, close - i - 1);
        if (std::find(kKnownSlots.begin(), kKnownSlots.end(), key) == kKnownSlots.end()) {
            throw DataError("template '" + name + "': unknown placeholder {" + key + "}");
        }
        i = close + 1;
    }
}

} // namespace

const std::vector<std::string>& PromptLibrary::template_names() {
    return kTemplateNames;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (const std::string& name : kTemplateNames) {
        std::string text = util::read_file(dir / (name + ".txt"));
        validate_template(name, text);
        lib.templates_[name] = std::move(text);
    }
    std::string expected_suffix(kAutoCotSuffix);
    if ("\n" + lib.templates_.at("auto_cot_suffix") != expected_suffix) {
        throw DataError("auto_cot_suffix.txt does not match the fixed suffix");
    }
    return lib;
}

const std::string& PromptLibrary::raw_template(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw UsageError("unknown template '" + name + "'");
    }
    return it->second;
}

std::string PromptLibrary::render(const Query& query, Strategy strategy) const {
    if (strategy == Strategy::MultiStep) {
        throw UsageError("multi-step prompts are rendered per step");
    }
    if (strategy == Strategy::SimpleInstruction &&
        query.kind != TaskKind::ContextualPathGeneration) {
        throw UsageError("simple-instruction applies to path generation only");
    }

    std::map<std::string, std::string> values;
    values["head_entity"] = query.head.value();
    if (query.tail) {
        values["tail_entity"] = query.tail->value();
    }
    std::string name;
    switch (query.kind) {
    case TaskKind::TailPrediction:
        if (!query.relation) {
            throw DataError("query " + query.id + ": tail prediction without a relation");
        }
        values["relation"] = query.relation->value();
        name = "tail_prediction__single_step";
        break;
    case TaskKind::RelationPrediction:
        name = "relation_prediction__single_step";
        break;
    case TaskKind::RelationExtraction:
        values["context"] = query.context;
        name = "relation_extraction__single_step";
        break;
    case TaskKind::ContextualPathGeneration:
        values["context"] = query.context;
        name = strategy == Strategy::SimpleInstruction ? "cpg__simple_instruction"
                                                       : "cpg__single_step";
        break;
    }
    std::string prompt = substitute(raw_template(name), values, name);
    if (strategy == Strategy::SingleStepAutoCoT) {
        prompt += kAutoCotSuffix;
    }
    return prompt;
}

std::string PromptLibrary::render_step1(const Query& query) const {
    if (query.kind != TaskKind::ContextualPathGeneration) {
        throw UsageError("multi-step applies to path generation only");
    }
    std::map<std::string, std::string> values{
        {"head_entity", query.head.value()},
        {"tail_entity", query.tail ? query.tail->value() : ""},
        {"context", query.context},
    };
    return substitute(raw_template("cpg__multi_step__1_support_sentences"), values,
                      "cpg__multi_step__1_support_sentences");
}

std::string PromptLibrary::render_step2(const Query& query,
                                        const std::string& support_sentences) const {
    std::map<std::string, std::string> values{
        {"head_entity", query.head.value()},
        {"tail_entity", query.tail ? query.tail->value() : ""},
        {"support_sentences", support_sentences},
    };
    return substitute(raw_template("cpg__multi_step__2_entity_linking"), values,
                      "cpg__multi_step__2_entity_linking");
}

std::string PromptLibrary::render_step3(const std::string& linked_head,
                                        const std::string& linked_tail,
                                        const std::string& support_sentences) const {
    std::map<std::string, std::string> values{
        {"head_entity", linked_head},
        {"tail_entity", linked_tail},
        {"support_sentences", support_sentences},
    };
    return substitute(raw_template("cpg__multi_step__3_path_generation"), values,
                      "cpg__multi_step__3_path_generation");
}

std::string PipelineTrace::to_json() const {
    json j;
    json steps_json = json::array();
    for (const PipelineStep& step : steps) {
        json s;
        s["name"] = step.name;
        s["prompt"] = step.prompt;
        s["response"] = step.response;
        steps_json.push_back(std::move(s));
    }
    j["steps"] = std::move(steps_json);
    j["support_sentences"] = support_sentences;
    j["linked_head"] = linked_head;
    j["linked_tail"] = linked_tail;
    j["final_response"] = final_response;
    j["warnings"] = warnings;
    j["error"] = error;
    return j.dump();
}

PipelineTrace run_multi_step(const Query& query, LlmClient& client,
                             const GenerationParams& params, int trial,
                             const PromptLibrary& prompts) {
    PipelineTrace trace;
    auto call = [&](const std::string& name, const std::string& prompt) -> std::string {
        LlmRequest request = LlmRequest::single_user(params.wire_model, prompt,
                                                     params.temperature, params.max_tokens);
        std::string response = client.complete(request, trial);
        trace.steps.push_back({name, prompt, response});
        return response;
    };

    try {
        std::string support = call("support_sentences", prompts.render_step1(query));
        trace.support_sentences = support;
        if (util::trim(support).empty()) {
            trace.error = "step 1 returned no support sentences";
            return trace;
        }

        std::string linking = call("entity_linking", prompts.render_step2(query, support));
        std::vector<Iri> entities;
        for (const Iri& mention : scan_iri_mentions(linking)) {
            if (mention.kind() == IriKind::Entity) {
                entities.push_back(mention);
            }
        }
        if (entities.size() < 2) {
            trace.error = "step 2 linked " + std::to_string(entities.size()) +
                          " entities, need 2";
            return trace;
        }
        if (entities.size() > 2) {
            trace.warnings.push_back("step 2 linked " + std::to_string(entities.size()) +
                                     " entities; using the first two");
        }
        trace.linked_head = entities[0].value();
        trace.linked_tail = entities[1].value();

        trace.final_response =
            call("path_generation",
                 prompts.render_step3(trace.linked_head, trace.linked_tail, support));
    } catch (const std::exception& e) {
        trace.error = e.what();
    }
    return trace;
}

} // namespace kgr
