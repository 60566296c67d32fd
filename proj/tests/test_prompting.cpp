#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "kgr/errors.hpp"
#include "kgr/llm_client.hpp"
#include "kgr/prompting.hpp"
#include "kgr/tasks.hpp"
#include "kgr/util.hpp"

using namespace kgr;

namespace {

const std::string kFixtures = KGR_FIXTURE_DIR;
const std::string kPrompts = KGR_PROMPTS_DIR;
const std::string kGolden = std::string(KGR_GOLDEN_DIR) + "/prompts";

std::vector<Query> fixture_tasks() {
    Snapshot snap = load_snapshot(kFixtures + "/kg.nt", kFixtures + "/ontology.nt");
    return load_tasks(kFixtures + "/tasks.jsonl", snap.graph, snap.ontology);
}

const Query& by_id(const std::vector<Query>& queries, const std::string& id) {
    for (const Query& q : queries) {
        if (q.id == id) {
            return q;
        }
    }
    throw std::runtime_error("missing query " + id);
}

std::string golden(const std::string& name) {
    return util::read_file(kGolden + "/" + name + ".golden.txt");
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "kgr_prompting_test" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

constexpr const char* kSupport = "Django Unchained features Christoph Waltz as Dr. King Schultz.";

} // namespace

TEST_CASE("rendered prompts match the committed goldens byte for byte") {
    PromptLibrary prompts = PromptLibrary::load(kPrompts);
    auto queries = fixture_tasks();
    const Query& tail = by_id(queries, "tail-0001");
    const Query& relation = by_id(queries, "rel-0001");
    const Query& re = by_id(queries, "re-0001");
    const Query& cpg = by_id(queries, "cpg-0001");

    CHECK(prompts.render(tail, Strategy::SingleStep) == golden("tail__single_step"));
    CHECK(prompts.render(tail, Strategy::SingleStepAutoCoT) == golden("tail__auto_cot"));
    CHECK(prompts.render(relation, Strategy::SingleStep) == golden("relation__single_step"));
    CHECK(prompts.render(relation, Strategy::SingleStepAutoCoT) == golden("relation__auto_cot"));
    CHECK(prompts.render(re, Strategy::SingleStep) == golden("re__single_step"));
    CHECK(prompts.render(re, Strategy::SingleStepAutoCoT) == golden("re__auto_cot"));
    CHECK(prompts.render(cpg, Strategy::SingleStep) == golden("cpg__single_step"));
    CHECK(prompts.render(cpg, Strategy::SingleStepAutoCoT) == golden("cpg__auto_cot"));
    CHECK(prompts.render(cpg, Strategy::SimpleInstruction) == golden("cpg__simple_instruction"));
    CHECK(prompts.render_step1(cpg) == golden("cpg__step1"));
    CHECK(prompts.render_step2(cpg, kSupport) == golden("cpg__step2"));
    CHECK(prompts.render_step3("dbr:Quentin_Jerome_Tarantino", "dbr:Christoph_Waltz", kSupport) ==
          golden("cpg__step3"));
}

TEST_CASE("think-aloud variant is the single-step prompt plus the fixed suffix") {
    PromptLibrary prompts = PromptLibrary::load(kPrompts);
    auto queries = fixture_tasks();
    for (const Query& q : queries) {
        CAPTURE(q.id);
        CHECK(prompts.render(q, Strategy::SingleStepAutoCoT) ==
              prompts.render(q, Strategy::SingleStep) + kAutoCotSuffix);
    }
    CHECK(std::string(kAutoCotSuffix).front() == '\n');
}

TEST_CASE("multi-step rendering goes through the step functions only") {
    PromptLibrary prompts = PromptLibrary::load(kPrompts);
    auto queries = fixture_tasks();
    CHECK_THROWS_AS((void)prompts.render(by_id(queries, "cpg-0001"), Strategy::MultiStep),
                    UsageError);
}

TEST_CASE("path-generation strategies fall back to single-step elsewhere") {
    CHECK(effective_strategy(Strategy::MultiStep, TaskKind::TailPrediction) ==
          Strategy::SingleStep);
    CHECK(effective_strategy(Strategy::SimpleInstruction, TaskKind::RelationPrediction) ==
          Strategy::SingleStep);
    CHECK(effective_strategy(Strategy::MultiStep, TaskKind::ContextualPathGeneration) ==
          Strategy::MultiStep);
    CHECK(effective_strategy(Strategy::SingleStepAutoCoT, TaskKind::RelationExtraction) ==
          Strategy::SingleStepAutoCoT);
    CHECK(effective_strategy(Strategy::SingleStepAutoCoT, TaskKind::ContextualPathGeneration) ==
          Strategy::SingleStepAutoCoT);
}

TEST_CASE("substituted values are inert to further substitution") {
    PromptLibrary prompts = PromptLibrary::load(kPrompts);
    Query q;
    q.id = "brace";
    q.kind = TaskKind::RelationExtraction;
    q.head = Iri::parse("dbr:A");
    q.tail = Iri::parse("dbr:B");
    q.context = "curly {head_entity} stays {verbatim}";
    q.ground_truth = Iri::parse("dbo:r");
    std::string rendered = prompts.render(q, Strategy::SingleStep);
    CHECK(rendered.find("curly {head_entity} stays {verbatim}") != std::string::npos);
}

TEST_CASE("template loading validates the directory contents") {
    PromptLibrary prompts = PromptLibrary::load(kPrompts);
    CHECK(PromptLibrary::template_names().size() == 9);
    for (const std::string& name : PromptLibrary::template_names()) {
        CAPTURE(name);
        CHECK_FALSE(prompts.raw_template(name).empty());
    }
    CHECK_THROWS_AS((void)prompts.raw_template("nonexistent"), UsageError);

    auto dir = fresh_dir("incomplete");
    util::write_file_atomic(dir / "tail_prediction__single_step.txt", "only one file");
    CHECK_THROWS_AS((void)PromptLibrary::load(dir), DataError);

    // A template referencing an unknown placeholder is caught at load time.
    auto bad = fresh_dir("bad_placeholder");
    for (const std::string& name : PromptLibrary::template_names()) {
        util::write_file_atomic(bad / (name + ".txt"),
                                util::read_file(kPrompts + "/" + name + ".txt"));
    }
    util::write_file_atomic(bad / "tail_prediction__single_step.txt", "{not_a_slot}");
    CHECK_THROWS_WITH_AS((void)PromptLibrary::load(bad), doctest::Contains("not_a_slot"),
                         DataError);

    // An unterminated placeholder is caught too.
    auto torn = fresh_dir("torn_placeholder");
    for (const std::string& name : PromptLibrary::template_names()) {
        util::write_file_atomic(torn / (name + ".txt"),
                                util::read_file(kPrompts + "/" + name + ".txt"));
    }
    util::write_file_atomic(torn / "cpg__simple_instruction.txt", "broken {head_entity");
    CHECK_THROWS_AS((void)PromptLibrary::load(torn), DataError);

    // The suffix file must agree with the built-in constant.
    auto drifted = fresh_dir("drifted_suffix");
    for (const std::string& name : PromptLibrary::template_names()) {
        util::write_file_atomic(drifted / (name + ".txt"),
                                util::read_file(kPrompts + "/" + name + ".txt"));
    }
    util::write_file_atomic(drifted / "auto_cot_suffix.txt", "Think hard.");
    CHECK_THROWS_AS((void)PromptLibrary::load(drifted), DataError);
}

TEST_CASE("three-step pipeline chains the scripted responses") {
    PromptLibrary prompts = PromptLibrary::load(kPrompts);
    auto queries = fixture_tasks();
    const Query& cpg = by_id(queries, "cpg-0001");
    GenerationParams params{"scripted-model", 0.0, 256};

    auto script_for = [&](const std::string& linking) {
        auto transport = std::make_shared<ScriptedTransport>("mock:unit");
        transport->script(LlmRequest::single_user(params.wire_model, prompts.render_step1(cpg),
                                                  0.0, params.max_tokens),
                          kSupport);
        transport->script(LlmRequest::single_user(params.wire_model,
                                                  prompts.render_step2(cpg, kSupport), 0.0,
                                                  params.max_tokens),
                          linking);
        return transport;
    };

    SUBCASE("happy path") {
        auto transport = script_for(
            "Head: dbr:Quentin_Tarantino\nTail: dbr:Christoph_Waltz");
        transport->script(
            LlmRequest::single_user(params.wire_model,
                                    prompts.render_step3("dbr:Quentin_Tarantino",
                                                         "dbr:Christoph_Waltz", kSupport),
                                    0.0, params.max_tokens),
            "dbr:Quentin_Tarantino, dbo:director, dbr:Django_Unchained, dbo:starring, "
            "dbr:Christoph_Waltz");
        LlmClient client(fresh_dir("cache_happy"), transport);
        PipelineTrace trace = run_multi_step(cpg, client, params, 0, prompts);
        REQUIRE_FALSE(trace.failed());
        REQUIRE(trace.steps.size() == 3);
        CHECK(trace.steps[0].name == "support_sentences");
        CHECK(trace.steps[1].name == "entity_linking");
        CHECK(trace.steps[2].name == "path_generation");
        CHECK(trace.support_sentences == kSupport);
        CHECK(trace.linked_head == "dbr:Quentin_Tarantino");
        CHECK(trace.linked_tail == "dbr:Christoph_Waltz");
        CHECK(trace.final_response.find("dbo:starring") != std::string::npos);
        CHECK(trace.warnings.empty());
        CHECK(transport->calls() == 3);
    }

    SUBCASE("overlinking keeps the first two and warns") {
        auto transport = script_for(
            "dbr:Quentin_Tarantino, dbr:Christoph_Waltz and dbr:Django_Unchained");
        transport->script(
            LlmRequest::single_user(params.wire_model,
                                    prompts.render_step3("dbr:Quentin_Tarantino",
                                                         "dbr:Christoph_Waltz", kSupport),
                                    0.0, params.max_tokens),
            "dbr:Quentin_Tarantino");
        LlmClient client(fresh_dir("cache_over"), transport);
        PipelineTrace trace = run_multi_step(cpg, client, params, 0, prompts);
        REQUIRE_FALSE(trace.failed());
        REQUIRE(trace.warnings.size() == 1);
        CHECK(trace.warnings[0].find("first two") != std::string::npos);
        CHECK(trace.linked_tail == "dbr:Christoph_Waltz");
    }

    SUBCASE("underlinking fails the pipeline at step two") {
        auto transport = script_for("I could only find dbr:Quentin_Tarantino.");
        LlmClient client(fresh_dir("cache_under"), transport);
        PipelineTrace trace = run_multi_step(cpg, client, params, 0, prompts);
        CHECK(trace.failed());
        CHECK(trace.error.find("need 2") != std::string::npos);
        CHECK(trace.steps.size() == 2);
        CHECK(trace.final_response.empty());
    }

    SUBCASE("blank support sentences fail the pipeline at step one") {
        auto transport = std::make_shared<ScriptedTransport>("mock:unit");
        transport->script(LlmRequest::single_user(params.wire_model, prompts.render_step1(cpg),
                                                  0.0, params.max_tokens),
                          "   \n  ");
        LlmClient client(fresh_dir("cache_blank"), transport);
        PipelineTrace trace = run_multi_step(cpg, client, params, 0, prompts);
        CHECK(trace.failed());
        CHECK(trace.error.find("step 1") != std::string::npos);
        CHECK(trace.steps.size() == 1);
    }

    SUBCASE("relation-kind mentions never count as linked entities") {
        auto transport = script_for("dbo:starring dbp:owner dbr:Quentin_Tarantino");
        LlmClient client(fresh_dir("cache_kinds"), transport);
        PipelineTrace trace = run_multi_step(cpg, client, params, 0, prompts);
        CHECK(trace.failed());
        CHECK(trace.error.find("1 entities") != std::string::npos);
    }
}

TEST_CASE("pipeline traces serialize their whole story") {
    PipelineTrace trace;
    trace.steps.push_back({"support_sentences", "p1", "r1"});
    trace.support_sentences = "r1";
    trace.linked_head = "dbr:A";
    trace.linked_tail = "dbr:B";
    trace.final_response = "dbr:A, dbo:r, dbr:B";
    trace.warnings.push_back("w");
    std::string json = trace.to_json();
    CHECK(json.find("\"support_sentences\"") != std::string::npos);
    CHECK(json.find("\"dbr:A, dbo:r, dbr:B\"") != std::string::npos);
    CHECK(json.find("\"w\"") != std::string::npos);
}
