#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <vector>

#include "kgr/errors.hpp"
#include "kgr/iri.hpp"

using namespace kgr;

TEST_CASE("entity prefix maps to Entity kind") {
    Iri iri = Iri::parse("dbr:Brad_Pitt");
    CHECK(iri.kind() == IriKind::Entity);
    CHECK(iri.value() == "dbr:Brad_Pitt");
    CHECK(iri.prefix() == "dbr");
    CHECK(iri.local_name() == "Brad_Pitt");
    CHECK_FALSE(iri.in_ontology_namespace());
}

TEST_CASE("ontology prefixes split on capitalization") {
    CHECK(Iri::parse("dbo:starring").kind() == IriKind::Relation);
    CHECK(Iri::parse("dbo:Person").kind() == IriKind::Class);
    CHECK(Iri::parse("dbp:owner").kind() == IriKind::Relation);
    CHECK(Iri::parse("dbp:Owner").kind() == IriKind::Class);
    CHECK(Iri::parse("dbo:starring").in_ontology_namespace());
    CHECK(Iri::parse("dbp:label").in_ontology_namespace());
    CHECK(Iri::parse("dbo:Person").in_ontology_namespace());
}

TEST_CASE("reserved vocabulary is always relation kind") {
    CHECK(Iri::parse("rdf:type").kind() == IriKind::Relation);
    CHECK(Iri::parse("rdfs:subClassOf").kind() == IriKind::Relation);
    CHECK(Iri::parse("rdfs:domain").kind() == IriKind::Relation);
    CHECK_FALSE(Iri::parse("rdf:type").in_ontology_namespace());
    // Capitalized local names stay relations under rdf:/rdfs:.
    CHECK(Iri::parse("rdfs:Class").kind() == IriKind::Relation);
}

TEST_CASE("local names keep everything after the first colon") {
    Iri iri = Iri::parse("dbr:Time:The_Kalman_Case");
    CHECK(iri.prefix() == "dbr");
    CHECK(iri.local_name() == "Time:The_Kalman_Case");

    Iri deep = Iri::parse("dbo:a:b:c");
    CHECK(deep.local_name() == "a:b:c");
}

TEST_CASE("punctuation-heavy dbpedia names survive") {
    const char* names[] = {
        "dbr:Moneyball_(film)",
        "dbr:Reading,_Berkshire",
        "dbr:Spider-Man",
        "dbr:It's_a_Wonderful_Life",
        "dbr:AC/DC",
        "dbr:Burbank_High_School_(Burbank,_California)",
    };
    for (const char* name : names) {
        CAPTURE(name);
        Iri iri = Iri::parse(name);
        CHECK(iri.value() == name);
        CHECK(iri.kind() == IriKind::Entity);
    }
}

TEST_CASE("malformed identifiers are rejected") {
    const char* bad[] = {
        "",             // empty
        "dbr:",         // empty local name
        ":Brad_Pitt",   // empty prefix
        "Brad_Pitt",    // no colon
        "foo:Brad",     // unknown prefix
        "DBR:Brad",     // prefixes are case-sensitive
        "dbr:Brad Pitt", // whitespace
        "dbr:Brad\tPitt",
        "dbr:Brad\nPitt",
        " dbr:Brad",
        "dbr:Brad ",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS((void)Iri::parse(text), DataError);
        CHECK_FALSE(Iri::try_parse(text).has_value());
    }
}

TEST_CASE("try_parse mirrors parse on success") {
    auto iri = Iri::try_parse("dbo:birthPlace");
    REQUIRE(iri.has_value());
    CHECK(iri->kind() == IriKind::Relation);
    CHECK(iri->value() == "dbo:birthPlace");
}

TEST_CASE("equality and ordering follow the raw value") {
    Iri a = Iri::parse("dbr:Alpha");
    Iri b = Iri::parse("dbr:Beta");
    CHECK(a == Iri::parse("dbr:Alpha"));
    CHECK(a != b);
    CHECK(a < b);

    std::set<Iri> sorted{b, a, Iri::parse("dbo:starring")};
    std::vector<std::string> values;
    for (const Iri& iri : sorted) {
        values.push_back(iri.value());
    }
    CHECK(values == std::vector<std::string>{"dbo:starring", "dbr:Alpha", "dbr:Beta"});
}

TEST_CASE("digit-leading ontology names are relations") {
    // starts-with-uppercase is the class test; anything else is a relation.
    CHECK(Iri::parse("dbo:2015_attendance").kind() == IriKind::Relation);
    CHECK(Iri::parse("dbo:_privateField").kind() == IriKind::Relation);
}
