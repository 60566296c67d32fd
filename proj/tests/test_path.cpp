#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "kgr/errors.hpp"
#include "kgr/kg.hpp"
#include "kgr/path.hpp"
#include "kgr/util.hpp"

using namespace kgr;
using nlohmann::json;

namespace {

KgPath path_of(const std::vector<std::string>& values) {
    std::vector<Iri> elements;
    for (const auto& v : values) {
        elements.push_back(Iri::parse(v));
    }
    return KgPath::make(std::move(elements));
}

std::vector<std::string> values_of(const KgPath& path) {
    std::vector<std::string> out;
    for (const Iri& iri : path.elements()) {
        out.push_back(iri.value());
    }
    return out;
}

} // namespace

TEST_CASE("path construction enforces the alternation invariant") {
    KgPath p = path_of({"dbr:A", "dbo:r", "dbr:B", "dbp:s", "dbr:C"});
    CHECK(p.length() == 5);
    CHECK(p.hop_count() == 2);
    CHECK(p.source().value() == "dbr:A");
    CHECK(p.target().value() == "dbr:C");

    Triple hop0 = p.hop(0);
    CHECK(hop0.head.value() == "dbr:A");
    CHECK(hop0.relation.value() == "dbo:r");
    CHECK(hop0.tail.value() == "dbr:B");
    Triple hop1 = p.hop(1);
    CHECK(hop1.head.value() == "dbr:B");
    CHECK(hop1.relation.value() == "dbp:s");
    CHECK(hop1.tail.value() == "dbr:C");

    CHECK_THROWS_AS((void)path_of({"dbr:A", "dbo:r"}), DataError);
    CHECK_THROWS_AS((void)path_of({"dbo:r"}), DataError);
    CHECK_THROWS_AS((void)path_of({"dbr:A", "dbr:B", "dbr:C"}), DataError);
    CHECK_THROWS_AS((void)path_of({}), DataError);
}

TEST_CASE("zero-hop path is a single entity") {
    KgPath p = path_of({"dbr:Solo"});
    CHECK(p.hop_count() == 0);
    CHECK(p.source() == p.target());
    CHECK(render_path(p) == "dbr:Solo");
}

TEST_CASE("render joins elements with comma-space") {
    KgPath p = path_of({"dbr:Reading,_Berkshire", "dbo:location", "dbr:Jamie_Foxx"});
    CHECK(render_path(p) == "dbr:Reading,_Berkshire, dbo:location, dbr:Jamie_Foxx");
}

TEST_CASE("committed parser corpus holds at one hundred percent") {
    std::string content = util::read_file(std::string(KGR_TESTDATA_DIR) + "/parser_corpus.jsonl");
    size_t cases = 0;
    for (const std::string& line : util::split_lines(content)) {
        if (util::trim(line).empty()) {
            continue;
        }
        json j = json::parse(line);
        ++cases;
        INFO("corpus case ", j["case"].get<int>());
        std::string text = j["text"].get<std::string>();
        std::string mode = j["mode"].get<std::string>();
        if (mode == "parse") {
            ParseOutcome outcome = parse_path(text);
            if (j["status"] == "well_formed") {
                REQUIRE(outcome.well_formed_path());
                CHECK(values_of(*outcome.path) == j["elements"].get<std::vector<std::string>>());
            } else {
                REQUIRE_FALSE(outcome.well_formed_path());
                REQUIRE(outcome.reason.has_value());
                CHECK(to_string(*outcome.reason) == j["reason"].get<std::string>());
            }
        } else {
            auto outcomes = extract_paths(text);
            CHECK(outcomes.size() == j["candidates"].get<size_t>());
            GenerationJudgment judgment = judge_generation(outcomes);
            if (j["judgment"] == "answer") {
                REQUIRE_FALSE(judgment.ill_formatted);
                REQUIRE(judgment.answer.has_value());
                CHECK(values_of(*judgment.answer) == j["elements"].get<std::vector<std::string>>());
                size_t warnings = j.contains("warnings") ? j["warnings"].get<size_t>() : 0;
                CHECK(judgment.warnings.size() == warnings);
            } else {
                CHECK(judgment.ill_formatted);
                CHECK_FALSE(judgment.answer.has_value());
                CHECK_FALSE(judgment.reason.empty());
            }
        }
    }
    CHECK(cases == 40);
}

TEST_CASE("ill-formatted outcomes carry the fault position") {
    ParseOutcome p1 = parse_path("dbr:A, dbo:r, dbo:s, dbr:B");
    REQUIRE(p1.reason == ReasonCode::NotAlternating);
    CHECK(p1.detail.find("position 2") != std::string::npos);

    ParseOutcome p2 = parse_path("dbr:A, rdf:type, dbr:B");
    REQUIRE(p2.reason == ReasonCode::BadPrefix);
    CHECK(p2.detail.find("position 1") != std::string::npos);

    // A broken token is reported before the alternation or length checks.
    ParseOutcome p3 = parse_path("dbr:A, dbo:r, not_an_iri");
    CHECK(p3.reason == ReasonCode::BadPrefix);
    ParseOutcome p4 = parse_path("dbr:A, dbo:r, foo:B, dbo:s");
    CHECK(p4.reason == ReasonCode::BadPrefix);
}

TEST_CASE("render and parse round-trip over punctuation-heavy names") {
    const std::vector<std::string> entities = {
        "dbr:Moneyball_(film)",
        "dbr:Reading,_Berkshire",
        "dbr:Spider-Man",
        "dbr:It's_a_Wonderful_Life",
        "dbr:AC/DC",
        "dbr:Burbank_High_School_(Burbank,_California)",
        "dbr:name_with:colon",
        "dbr:X",
        "dbr:Alexander_Hamilton",
    };
    const std::vector<std::string> relations = {
        "dbo:starring", "dbo:director", "dbp:label",
        "dbo:birthPlace", "dbp:owner", "dbo:Location",
    };
    std::mt19937_64 rng(20260814);
    for (int round = 0; round < 1000; ++round) {
        size_t hops = util::uniform_below(rng, 7);
        std::vector<std::string> values;
        values.push_back(entities[util::uniform_below(rng, entities.size())]);
        for (size_t h = 0; h < hops; ++h) {
            values.push_back(relations[util::uniform_below(rng, relations.size())]);
            values.push_back(entities[util::uniform_below(rng, entities.size())]);
        }
        KgPath original = path_of(values);
        std::string rendered = render_path(original);
        ParseOutcome outcome = parse_path(rendered);
        INFO("round ", round, ": ", rendered);
        REQUIRE(outcome.well_formed_path());
        CHECK(*outcome.path == original);
    }
}

TEST_CASE("extraction survives chatty framing") {
    GenerationJudgment j = judge_generation_text(
        "Of course. Based on the context, the relationship is:\n\n"
        "dbr:Quentin_Tarantino, dbo:director, dbr:Django_Unchained, dbo:starring, "
        "dbr:Christoph_Waltz\n\nWaltz won an Academy Award for the role.");
    REQUIRE_FALSE(j.ill_formatted);
    CHECK(render_path(*j.answer) ==
          "dbr:Quentin_Tarantino, dbo:director, dbr:Django_Unchained, dbo:starring, "
          "dbr:Christoph_Waltz");
}

TEST_CASE("competing well-formed paths invalidate the generation") {
    GenerationJudgment j = judge_generation_text(
        "Either dbr:A, dbo:r, dbr:B or dbr:A, dbo:s, dbr:B would work.");
    CHECK(j.ill_formatted);
    CHECK(j.reason.find("multiple paths") != std::string::npos);
}

TEST_CASE("mention scan reports every namespace hit in order") {
    auto mentions = scan_iri_mentions(
        "Link dbr:Tom_Hanks via dbo:founders; dbp:owner also applies to dbr:Playtone.");
    std::vector<std::string> values;
    for (const Iri& iri : mentions) {
        values.push_back(iri.value());
    }
    CHECK(values == std::vector<std::string>{"dbr:Tom_Hanks", "dbo:founders", "dbp:owner",
                                             "dbr:Playtone"});
}

TEST_CASE("embedded prefix heads do not start tokens") {
    // "xdbr:Y" has no boundary before the prefix, so nothing is extracted.
    CHECK(scan_iri_mentions("xdbr:Y teamed_dbo:up").empty());
    CHECK(extract_paths("xdbr:Y").empty());
}
