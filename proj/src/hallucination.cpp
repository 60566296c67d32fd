#include "kgr/hallucination.hpp"

#include "kgr/errors.hpp"

namespace kgr {

namespace {

bool satisfies(const Ontology& ontology, const std::set<Iri>& types, const Iri& required) {
    for (const Iri& cls : types) {
        if (ontology.is_subclass_or_equal(cls, required)) {
            return true;
        }
    }
    return false;
}

} // namespace

std::string describe(const HopVerdict& verdict) {
    if (std::holds_alternative<Valid>(verdict)) {
        return "valid";
    }
    if (std::holds_alternative<ContentSuspect>(verdict)) {
        return "content-suspect";
    }
    if (std::holds_alternative<ContentHallucinationConfirmed>(verdict)) {
        return "content-hallucination";
    }
    const auto& h = std::get<OntologyHallucination>(verdict);
    std::string out = h.side == ConstraintSide::Domain ? "domain violation: " : "range violation: ";
    out += "requires " + h.required.value() + ", found {";
    bool first = true;
    for (const Iri& cls : h.found) {
        if (!first) {
            out += ", ";
        }
        first = false;
        out += cls.value();
    }
    out += "}";
    return out;
}

bool is_ontology_hallucination(const HopVerdict& verdict) {
    return std::holds_alternative<OntologyHallucination>(verdict);
}

bool is_content_suspect(const HopVerdict& verdict) {
    return std::holds_alternative<ContentSuspect>(verdict);
}

bool is_valid(const HopVerdict& verdict) {
    return std::holds_alternative<Valid>(verdict);
}

HopVerdict check_ontology(const Ontology& ontology, const KnowledgeGraph& graph,
                          const Triple& hop) {
    if (hop.head.kind() != IriKind::Entity) {
        throw DataError("hop head must be a dbr: entity: '" + hop.head.value() + "'");
    }
    if (hop.tail.kind() != IriKind::Entity) {
        throw DataError("hop tail must be a dbr: entity: '" + hop.tail.value() + "'");
    }
    if (!hop.relation.in_ontology_namespace()) {
        throw DataError("hop relation must be a dbo:/dbp: IRI: '" + hop.relation.value() + "'");
    }

    if (auto domain = ontology.domain_of(hop.relation)) {
        const auto& types = ontology.types_of(hop.head);
        if (!satisfies(ontology, types, *domain)) {
            return OntologyHallucination{ConstraintSide::Domain, *domain, types};
        }
    }
    if (auto range = ontology.range_of(hop.relation)) {
        const auto& types = ontology.types_of(hop.tail);
        if (!satisfies(ontology, types, *range)) {
            return OntologyHallucination{ConstraintSide::Range, *range, types};
        }
    }
    if (graph.has_triple(hop)) {
        return Valid{};
    }
    return ContentSuspect{};
}

std::vector<HopVerdict> check_path(const Ontology& ontology, const KnowledgeGraph& graph,
                                   const KgPath& path) {
    std::vector<HopVerdict> verdicts;
    verdicts.reserve(path.hop_count());
    for (size_t i = 0; i < path.hop_count(); ++i) {
        verdicts.push_back(check_ontology(ontology, graph, path.hop(i)));
    }
    return verdicts;
}

double path_invalid_fraction(const Ontology& ontology, const KnowledgeGraph& graph,
                             const KgPath& path) {
    if (path.hop_count() == 0) {
        return 0.0;
    }
    size_t invalid = 0;
    for (size_t i = 0; i < path.hop_count(); ++i) {
        if (is_ontology_hallucination(check_ontology(ontology, graph, path.hop(i)))) {
            ++invalid;
        }
    }
    return static_cast<double>(invalid) / static_cast<double>(path.hop_count());
}

} // namespace kgr
