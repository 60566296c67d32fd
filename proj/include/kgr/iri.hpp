#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace kgr {

// Prefixed identifiers in the DBpedia style: dbr:Brad_Pitt, dbo:starring,
// dbo:Person, dbp:owner, plus the reserved rdf:/rdfs: vocabulary used by
// ontology files. The kind is derived from the prefix: dbr: names entities,
// dbo:/dbp: names classes when the local name is capitalized and relations
// otherwise, rdf:/rdfs: names the reserved relations.
enum class IriKind { Entity, Relation, Class };

std::string_view to_string(IriKind kind);

class Iri {
public:
    Iri() = default;

    // Requires PREFIX:LOCAL with a known prefix, non-empty local name and no
    // whitespace. Local names may contain further colons.
    static Iri parse(std::string_view text);
    static std::optional<Iri> try_parse(std::string_view text);

    const std::string& value() const { return value_; }
    IriKind kind() const { return kind_; }
    std::string_view prefix() const;
    std::string_view local_name() const;

    bool in_ontology_namespace() const;  // dbo: or dbp:

    friend bool operator==(const Iri& a, const Iri& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Iri& a, const Iri& b) {
        return a.value_ <=> b.value_;
    }

private:
    Iri(std::string value, IriKind kind) : value_(std::move(value)), kind_(kind) {}

    std::string value_;
    IriKind kind_ = IriKind::Entity;
};

} // namespace kgr
