#include "kgr/iri.hpp"

#include "kgr/errors.hpp"
#include "kgr/util.hpp"

namespace kgr {

std::string_view to_string(IriKind kind) {
    switch (kind) {
    case IriKind::Entity: return "entity";
    case IriKind::Relation: return "relation";
    case IriKind::Class: return "class";
    }
    return "?";
}

Iri Iri::parse(std::string_view text) {
    auto iri = try_parse(text);
    if (!iri) {
        throw DataError("invalid IRI: '" + std::string(text) + "'");
    }
    return *iri;
}

std::optional<Iri> Iri::try_parse(std::string_view text) {
    size_t colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) {
        return std::nullopt;
    }
    for (char c : text) {
        if (util::is_space(c)) {
            return std::nullopt;
        }
    }
    std::string_view prefix = text.substr(0, colon);
    std::string_view local = text.substr(colon + 1);
    IriKind kind;
    if (prefix == "dbr") {
        kind = IriKind::Entity;
    } else if (prefix == "dbo" || prefix == "dbp") {
        kind = util::starts_with_upper(local) ? IriKind::Class : IriKind::Relation;
    } else if (prefix == "rdf" || prefix == "rdfs") {
        kind = IriKind::Relation;
    } else {
        return std::nullopt;
    }
    return Iri(std::string(text), kind);
}

std::string_view Iri::prefix() const {
    std::string_view v = value_;
    return v.substr(0, v.find(':'));
}

std::string_view Iri::local_name() const {
    std::string_view v = value_;
    return v.substr(v.find(':') + 1);
}

bool Iri::in_ontology_namespace() const {
    auto p = prefix();
    return p == "dbo" || p == "dbp";
}

} // namespace kgr
